#include "driftcast/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace driftcast {

Mat positional_encoding(std::size_t steps, std::size_t d_m) {
  if (steps == 0) throw std::invalid_argument("positional encoding: steps must be positive");
  if (d_m == 0 || d_m % 2 != 0)
    throw std::invalid_argument("positional encoding: d_m must be even and positive");
  Mat pe(steps, d_m);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < d_m / 2; ++i) {
      const double rate =
          std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(d_m));
      const double arg = static_cast<double>(t) / rate;
      pe.at(t, 2 * i) = std::sin(arg);
      pe.at(t, 2 * i + 1) = std::cos(arg);
    }
  }
  return pe;
}

namespace {

TensorPtr mat_const(const Mat& m) {
  return make_tensor({m.rows, m.cols}, std::vector<double>(m.v.begin(), m.v.end()));
}

TensorPtr pe_const(std::size_t steps, std::size_t d_m) {
  return mat_const(positional_encoding(steps, d_m));
}

}  // namespace

Seq2SeqTransformer::Seq2SeqTransformer(const TransformerConfig& cfg) : cfg_(cfg) {
  if (cfg.d_m % 2 != 0) throw std::invalid_argument("d_m must be even");
  if (cfg.heads == 0 || cfg.d_k == 0) throw std::invalid_argument("heads and d_k must be positive");
  Rng rng(cfg.seed);
  auto ln = [&](LayerNormParams& p) {
    p.gain = make_tensor({1, cfg_.d_m}, std::vector<double>(cfg_.d_m, 1.0));
    p.offset = make_tensor({1, cfg_.d_m});
    params_.push_back(p.gain);
    params_.push_back(p.offset);
  };

  we_ = glorot(cfg.input_dim, cfg.d_m, rng);
  be_ = make_tensor({1, cfg.d_m});
  params_.push_back(we_);
  params_.push_back(be_);
  ln(ln_e0_);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    HeadParams hp{glorot(cfg.d_m, cfg.d_k, rng), glorot(cfg.d_m, cfg.d_k, rng),
                  glorot(cfg.d_m, cfg.d_k, rng)};
    params_.push_back(hp.wq);
    params_.push_back(hp.wk);
    params_.push_back(hp.wv);
    enc_heads_.push_back(hp);
  }
  enc_wh_ = glorot(cfg.heads * cfg.d_k, cfg.d_m, rng);
  params_.push_back(enc_wh_);
  ln(ln_e1_);
  enc_w3_ = glorot(cfg.d_m, cfg.ffn, rng);
  enc_b3_ = make_tensor({1, cfg.ffn});
  enc_w2_ = glorot(cfg.ffn, cfg.d_m, rng);
  enc_b2_ = make_tensor({1, cfg.d_m});
  params_.push_back(enc_w3_);
  params_.push_back(enc_b3_);
  params_.push_back(enc_w2_);
  params_.push_back(enc_b2_);
  ln(ln_e2_);

  wd_ = glorot(2, cfg.d_m, rng);
  bd_ = make_tensor({1, cfg.d_m});
  params_.push_back(wd_);
  params_.push_back(bd_);
  ln(ln_d0_);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    HeadParams hp{glorot(cfg.d_m, cfg.d_k, rng), glorot(cfg.d_m, cfg.d_k, rng),
                  glorot(cfg.d_m, cfg.d_k, rng)};
    params_.push_back(hp.wq);
    params_.push_back(hp.wk);
    params_.push_back(hp.wv);
    dec_heads_.push_back(hp);
  }
  dec_wh_ = glorot(cfg.heads * cfg.d_k, cfg.d_m, rng);
  params_.push_back(dec_wh_);
  ln(ln_d1_);
  wq2_ = glorot(cfg.d_m, cfg.d_m, rng);
  wk2_ = glorot(cfg.d_m, cfg.d_m, rng);
  wv2_ = glorot(cfg.d_m, cfg.d_m, rng);
  whd_ = glorot(cfg.d_m, cfg.d_m, rng);
  params_.push_back(wq2_);
  params_.push_back(wk2_);
  params_.push_back(wv2_);
  params_.push_back(whd_);
  ln(ln_d2_);
  dec_w1_ = glorot(cfg.d_m, cfg.ffn, rng);
  dec_b1_ = make_tensor({1, cfg.ffn});
  dec_w2_ = glorot(cfg.ffn, cfg.d_m, rng);
  dec_b2_ = make_tensor({1, cfg.d_m});
  params_.push_back(dec_w1_);
  params_.push_back(dec_b1_);
  params_.push_back(dec_w2_);
  params_.push_back(dec_b2_);
  ln(ln_d3_);
  wp_ = glorot(cfg.d_m, 2, rng);
  bp_ = make_tensor({1, 2});
  params_.push_back(wp_);
  params_.push_back(bp_);
}

std::vector<std::string> Seq2SeqTransformer::param_names() const {
  std::vector<std::string> names;
  auto push_ln = [&](const std::string& base) {
    names.push_back(base + ".gain");
    names.push_back(base + ".offset");
  };
  names.push_back("we");
  names.push_back("be");
  push_ln("ln_e0");
  for (std::size_t h = 0; h < cfg_.heads; ++h) {
    const std::string base = "enc.h" + std::to_string(h);
    names.push_back(base + ".wq");
    names.push_back(base + ".wk");
    names.push_back(base + ".wv");
  }
  names.push_back("enc.wh");
  push_ln("ln_e1");
  names.push_back("enc.w3");
  names.push_back("enc.b3");
  names.push_back("enc.w2");
  names.push_back("enc.b2");
  push_ln("ln_e2");
  names.push_back("wd");
  names.push_back("bd");
  push_ln("ln_d0");
  for (std::size_t h = 0; h < cfg_.heads; ++h) {
    const std::string base = "dec.h" + std::to_string(h);
    names.push_back(base + ".wq");
    names.push_back(base + ".wk");
    names.push_back(base + ".wv");
  }
  names.push_back("dec.wh");
  push_ln("ln_d1");
  names.push_back("cross.wq2");
  names.push_back("cross.wk2");
  names.push_back("cross.wv2");
  names.push_back("cross.whd");
  push_ln("ln_d2");
  names.push_back("dec.w1");
  names.push_back("dec.b1");
  names.push_back("dec.w2");
  names.push_back("dec.b2");
  push_ln("ln_d3");
  names.push_back("wp");
  names.push_back("bp");
  return names;
}

TensorPtr Seq2SeqTransformer::norm(const TensorPtr& x, const LayerNormParams& ln) const {
  return add_rowvec(mul_rowvec(layer_norm_rows(x), ln.gain), ln.offset);
}

TensorPtr Seq2SeqTransformer::self_attention(const TensorPtr& z,
                                             const std::vector<HeadParams>& heads,
                                             const TensorPtr& wh, bool causal) const {
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg_.d_k));
  std::vector<TensorPtr> head_outputs;
  head_outputs.reserve(heads.size());
  for (const auto& hp : heads) {
    auto q = matmul(z, hp.wq);
    auto k = matmul(z, hp.wk);
    auto v = matmul(z, hp.wv);
    auto scores = scale(matmul_nt(q, k), inv_sqrt);
    auto a = causal ? causal_softmax_rows(scores) : softmax_rows(scores);
    head_outputs.push_back(matmul(a, v));
  }
  return matmul(concat_cols(head_outputs), wh);
}

TensorPtr Seq2SeqTransformer::encode_graph(const Mat& x_e) const {
  if (x_e.cols != cfg_.input_dim)
    throw std::invalid_argument("transformer: encoder input width mismatch");
  auto x = mat_const(x_e);
  auto embedded = add(add_rowvec(matmul(x, we_), be_), pe_const(x_e.rows, cfg_.d_m));
  auto z0 = norm(embedded, ln_e0_);
  auto u_e = norm(add(z0, self_attention(z0, enc_heads_, enc_wh_, /*causal=*/false)), ln_e1_);
  auto ffn = add_rowvec(matmul(relu(add_rowvec(matmul(u_e, enc_w3_), enc_b3_)), enc_w2_),
                        enc_b2_);
  auto pre = cfg_.encoder_ffn_residual ? add(u_e, ffn) : ffn;
  return norm(pre, ln_e2_);
}

TensorPtr Seq2SeqTransformer::decode_graph(const TensorPtr& z1, const TensorPtr& y_d) const {
  if (y_d->cols() != 2) throw std::invalid_argument("transformer: decoder input must be T x 2");
  auto embedded = add(add_rowvec(matmul(y_d, wd_), bd_), pe_const(y_d->rows(), cfg_.d_m));
  auto d0 = norm(embedded, ln_d0_);
  auto u_d = norm(add(d0, self_attention(d0, dec_heads_, dec_wh_, /*causal=*/true)), ln_d1_);

  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg_.d_m));
  auto q = matmul(u_d, wq2_);
  auto k = matmul(z1, wk2_);
  auto v = matmul(z1, wv2_);
  auto cross = matmul(matmul(softmax_rows(scale(matmul_nt(q, k), inv_sqrt)), v), whd_);
  auto u_d2 = norm(add(u_d, cross), ln_d2_);

  auto ffn = add_rowvec(matmul(relu(add_rowvec(matmul(u_d2, dec_w1_), dec_b1_)), dec_w2_),
                        dec_b2_);
  auto d1 = norm(add(u_d2, ffn), ln_d3_);
  return add_rowvec(matmul(d1, wp_), bp_);
}

TensorPtr Seq2SeqTransformer::batch_loss(const std::vector<const SequenceExample*>& batch) const {
  std::vector<TensorPtr> outputs;
  std::vector<double> target;
  outputs.reserve(batch.size());
  for (const auto* ex : batch) {
    auto z1 = encode_graph(ex->x_e);
    outputs.push_back(decode_graph(z1, mat_const(ex->y_d)));
    target.insert(target.end(), ex->y_out.v.begin(), ex->y_out.v.end());
  }
  return mse_loss(outputs.size() == 1 ? outputs[0] : concat_rows(outputs), target);
}

TrainHistory Seq2SeqTransformer::train(const std::vector<SequenceExample>& examples,
                                       const TrainConfig& cfg) {
  auto loss_fn = [this, &examples](const std::vector<std::size_t>& idx, bool) {
    std::vector<const SequenceExample*> batch;
    batch.reserve(idx.size());
    for (std::size_t i : idx) batch.push_back(&examples[i]);
    return batch_loss(batch);
  };
  auto hist = run_training(examples.size(), cfg, params_, loss_fn);
  trained_ = true;
  return hist;
}

Mat Seq2SeqTransformer::encoder_block(const Mat& x_e) const {
  auto z1 = encode_graph(x_e);
  Mat out(z1->rows(), z1->cols());
  out.v = z1->data;
  return out;
}

Mat Seq2SeqTransformer::decode_teacher_forced(const Mat& x_e, const Mat& y_d) const {
  auto out = decode_graph(encode_graph(x_e), mat_const(y_d));
  Mat m(out->rows(), 2);
  m.v = out->data;
  return m;
}

Mat Seq2SeqTransformer::forecast(const Mat& x_e, std::size_t l_d) const {
  if (!trained_) throw std::logic_error("forecast before training");
  if (l_d == 0) throw std::invalid_argument("forecast horizon must be positive");
  auto z1 = encode_graph(x_e);
  Mat y_d(1, 2);  // zero start token
  Mat out(l_d, 2);
  for (std::size_t u = 0; u < l_d; ++u) {
    auto pred = decode_graph(z1, mat_const(y_d));
    out.at(u, 0) = pred->at(u, 0);
    out.at(u, 1) = pred->at(u, 1);
    if (u + 1 < l_d) {
      Mat next(u + 2, 2);
      std::copy(y_d.v.begin(), y_d.v.end(), next.v.begin());
      next.at(u + 1, 0) = out.at(u, 0);
      next.at(u + 1, 1) = out.at(u, 1);
      y_d = std::move(next);
    }
  }
  return out;
}

}  // namespace driftcast
