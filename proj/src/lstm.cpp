#include "driftcast/lstm.hpp"

#include <cmath>
#include <stdexcept>

namespace driftcast {

namespace {

TensorPtr stack_rows(const std::vector<const Mat*>& batch, std::size_t r) {
  const std::size_t cols = batch.front()->cols;
  auto x = make_tensor({batch.size(), cols});
  for (std::size_t bi = 0; bi < batch.size(); ++bi)
    std::copy(batch[bi]->row(r), batch[bi]->row(r) + cols, x->data.begin() + bi * cols);
  return x;
}

TensorPtr ones(std::size_t rows, std::size_t cols) {
  return make_tensor({rows, cols}, std::vector<double>(rows * cols, 1.0));
}

}  // namespace

LstmLayerParams make_lstm_layer(std::size_t input_dim, std::size_t units, Rng& rng) {
  LstmLayerParams layer;
  layer.units = units;
  layer.wx = glorot(input_dim, 4 * units, rng);
  layer.uh = glorot(units, 4 * units, rng);
  layer.b = make_tensor({1, 4 * units});
  // forget-gate bias +1 keeps early training from flushing the cell state
  for (std::size_t j = units; j < 2 * units; ++j) layer.b->data[j] = 1.0;
  return layer;
}

std::pair<TensorPtr, TensorPtr> lstm_cell(const LstmLayerParams& layer, const TensorPtr& x,
                                          const TensorPtr& h_prev, const TensorPtr& c_prev) {
  const std::size_t u = layer.units;
  if (h_prev->cols() != u || c_prev->cols() != u)
    throw std::invalid_argument("lstm_cell: state width mismatch");
  auto gates = add_rowvec(add(matmul(x, layer.wx), matmul(h_prev, layer.uh)), layer.b);
  auto i = sigmoid(slice_cols(gates, 0, u));
  auto f = sigmoid(slice_cols(gates, u, 2 * u));
  auto o = sigmoid(slice_cols(gates, 2 * u, 3 * u));
  auto c_tilde = tanh(slice_cols(gates, 3 * u, 4 * u));
  auto c = add(mul(f, c_prev), mul(i, c_tilde));
  auto h = mul(o, tanh(c));
  return {h, c};
}

Seq2SeqLstm::Seq2SeqLstm(std::size_t input_dim, bool attention, std::uint64_t seed,
                         std::size_t units, std::size_t d_k)
    : input_dim_(input_dim), units_(units), d_k_(d_k), attention_(attention) {
  Rng rng(seed);
  enc1_ = make_lstm_layer(input_dim, units, rng);
  enc2_ = make_lstm_layer(units, units, rng);
  dec_ = make_lstm_layer(2, units, rng);
  const std::size_t out_in = attention ? units + d_k : units;
  w_out_ = glorot(out_in, 2, rng);
  b_out_ = make_tensor({1, 2});
  params_ = {enc1_.wx, enc1_.uh, enc1_.b, enc2_.wx, enc2_.uh, enc2_.b,
             dec_.wx,  dec_.uh,  dec_.b,  w_out_,   b_out_};
  if (attention) {
    wq_ = glorot(units, d_k, rng);
    wk_ = glorot(units, d_k, rng);
    wv_ = glorot(units, d_k, rng);
    params_.push_back(wq_);
    params_.push_back(wk_);
    params_.push_back(wv_);
  }
}

std::vector<std::string> Seq2SeqLstm::param_names() const {
  std::vector<std::string> names = {"enc1.wx", "enc1.uh", "enc1.b", "enc2.wx",
                                    "enc2.uh", "enc2.b",  "dec.wx", "dec.uh",
                                    "dec.b",   "w_out",   "b_out"};
  if (attention_) {
    names.push_back("wq");
    names.push_back("wk");
    names.push_back("wv");
  }
  return names;
}

Seq2SeqLstm::Encoded Seq2SeqLstm::encode_batch(const std::vector<const Mat*>& batch) const {
  const std::size_t bsz = batch.size();
  const std::size_t steps = batch.front()->rows;
  for (const Mat* m : batch)
    if (m->cols != input_dim_ || m->rows != steps)
      throw std::invalid_argument("encoder input shape mismatch");

  Encoded enc;
  enc.h1 = make_tensor({bsz, units_});
  enc.c1 = make_tensor({bsz, units_});
  enc.h2 = make_tensor({bsz, units_});
  enc.c2 = make_tensor({bsz, units_});
  for (std::size_t t = 0; t < steps; ++t) {
    auto x = stack_rows(batch, t);
    auto [h1, c1] = lstm_cell(enc1_, x, enc.h1, enc.c1);
    enc.h1 = h1;
    enc.c1 = c1;
    auto [h2, c2] = lstm_cell(enc2_, h1, enc.h2, enc.c2);
    enc.h2 = h2;
    enc.c2 = c2;
    enc.states.push_back(h2);
  }
  return enc;
}

TensorPtr Seq2SeqLstm::output_step(const TensorPtr& h3, const Encoded& enc,
                                   TensorPtr* attn_row) const {
  if (!attention_) return add_rowvec(matmul(h3, w_out_), b_out_);

  const std::size_t l_e = enc.states.size();
  auto q = matmul(h3, wq_);  // batch x d_k
  std::vector<TensorPtr> scores;
  scores.reserve(l_e);
  auto ones_col = ones(d_k_, 1);
  for (std::size_t t = 0; t < l_e; ++t) {
    auto k_t = matmul(enc.states[t], wk_);
    scores.push_back(matmul(mul(q, k_t), ones_col));  // row-wise dot, batch x 1
  }
  auto a = softmax_rows(scale(concat_cols(scores), 1.0 / std::sqrt(static_cast<double>(d_k_))));
  if (attn_row != nullptr) *attn_row = a;

  TensorPtr context;
  auto ones_row = ones(1, d_k_);
  for (std::size_t t = 0; t < l_e; ++t) {
    auto v_t = matmul(enc.states[t], wv_);
    auto weight = matmul(slice_cols(a, t, t + 1), ones_row);  // broadcast batch x d_k
    auto term = mul(weight, v_t);
    context = context ? add(context, term) : term;
  }
  return add_rowvec(matmul(concat_cols({h3, context}), w_out_), b_out_);
}

std::vector<TensorPtr> Seq2SeqLstm::decode_batch(const Encoded& enc,
                                                 const std::vector<const Mat*>& y_d,
                                                 std::vector<TensorPtr>* attn_rows) const {
  const std::size_t l_d = y_d.front()->rows;
  for (const Mat* m : y_d)
    if (m->cols != 2 || m->rows != l_d)
      throw std::invalid_argument("decoder input shape mismatch");

  TensorPtr h3 = enc.h2;
  TensorPtr c3 = enc.c2;
  std::vector<TensorPtr> outputs;
  outputs.reserve(l_d);
  for (std::size_t u = 0; u < l_d; ++u) {
    auto y_u = stack_rows(y_d, u);
    auto [h, c] = lstm_cell(dec_, y_u, h3, c3);
    h3 = h;
    c3 = c;
    TensorPtr attn;
    outputs.push_back(output_step(h3, enc, attn_rows ? &attn : nullptr));
    if (attn_rows != nullptr) attn_rows->push_back(attn);
  }
  return outputs;
}

TensorPtr Seq2SeqLstm::batch_loss(const std::vector<const SequenceExample*>& batch) const {
  std::vector<const Mat*> x, yd;
  for (const auto* ex : batch) {
    x.push_back(&ex->x_e);
    yd.push_back(&ex->y_d);
  }
  auto enc = encode_batch(x);
  auto outputs = decode_batch(enc, yd);
  auto pred = concat_cols(outputs);  // batch x 2*l_d, step-major
  std::vector<double> target;
  target.reserve(batch.size() * outputs.size() * 2);
  for (const auto* ex : batch)
    for (std::size_t u = 0; u < ex->y_out.rows; ++u) {
      target.push_back(ex->y_out.at(u, 0));
      target.push_back(ex->y_out.at(u, 1));
    }
  return mse_loss(pred, target);
}

TrainHistory Seq2SeqLstm::train(const std::vector<SequenceExample>& examples,
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

Mat Seq2SeqLstm::encode_states(const Mat& x_e) const {
  auto enc = encode_batch({&x_e});
  Mat out(enc.states.size(), units_);
  for (std::size_t t = 0; t < enc.states.size(); ++t)
    std::copy(enc.states[t]->data.begin(), enc.states[t]->data.end(), out.row(t));
  return out;
}

Mat Seq2SeqLstm::forecast(const Mat& x_e, std::size_t l_d) const {
  if (!trained_) throw std::logic_error("forecast before training");
  if (l_d == 0) throw std::invalid_argument("forecast horizon must be positive");
  auto enc = encode_batch({&x_e});
  TensorPtr h3 = enc.h2;
  TensorPtr c3 = enc.c2;
  TensorPtr y_in = make_tensor({1, 2});  // zero start token
  Mat out(l_d, 2);
  for (std::size_t u = 0; u < l_d; ++u) {
    auto [h, c] = lstm_cell(dec_, y_in, h3, c3);
    h3 = h;
    c3 = c;
    auto pred = output_step(h3, enc, nullptr);
    out.at(u, 0) = pred->data[0];
    out.at(u, 1) = pred->data[1];
    y_in = make_tensor({1, 2}, {pred->data[0], pred->data[1]});
  }
  return out;
}

Mat Seq2SeqLstm::decode_teacher_forced(const Mat& x_e, const Mat& y_d) const {
  auto enc = encode_batch({&x_e});
  auto outputs = decode_batch(enc, {&y_d});
  Mat out(outputs.size(), 2);
  for (std::size_t u = 0; u < outputs.size(); ++u) {
    out.at(u, 0) = outputs[u]->data[0];
    out.at(u, 1) = outputs[u]->data[1];
  }
  return out;
}

Seq2SeqLstm::DecodeResult Seq2SeqLstm::decode_with_attention(const Mat& x_e,
                                                             const Mat& y_d) const {
  auto enc = encode_batch({&x_e});
  std::vector<TensorPtr> attn_rows;
  auto outputs = decode_batch(enc, {&y_d}, attention_ ? &attn_rows : nullptr);
  DecodeResult res;
  res.predictions = Mat(outputs.size(), 2);
  for (std::size_t u = 0; u < outputs.size(); ++u) {
    res.predictions.at(u, 0) = outputs[u]->data[0];
    res.predictions.at(u, 1) = outputs[u]->data[1];
  }
  if (attention_) {
    res.attention = Mat(attn_rows.size(), enc.states.size());
    for (std::size_t u = 0; u < attn_rows.size(); ++u)
      std::copy(attn_rows[u]->data.begin(), attn_rows[u]->data.end(), res.attention.row(u));
  }
  return res;
}

}  // namespace driftcast
