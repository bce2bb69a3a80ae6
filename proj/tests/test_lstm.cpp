#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "driftcast/lstm.hpp"

using namespace driftcast;

namespace {

// Tiny deterministic examples with smooth dynamics the model can fit.
std::vector<SequenceExample> toy_examples(std::size_t count, std::size_t l_e, std::size_t l_d,
                                          std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SequenceExample> out;
  for (std::size_t n = 0; n < count; ++n) {
    double phase = rng.uniform(0.0, 6.28);
    SequenceExample ex;
    ex.object_id = "toy";
    ex.start_index = n;
    ex.x_e = Mat(l_e, p);
    ex.y_out = Mat(l_d, 2);
    ex.y_d = Mat(l_d, 2);
    for (std::size_t r = 0; r < l_e; ++r)
      for (std::size_t c = 0; c < p; ++c)
        ex.x_e.at(r, c) = std::sin(phase + 0.3 * r + 0.7 * c);
    for (std::size_t r = 0; r < l_d; ++r) {
      ex.y_out.at(r, 0) = std::sin(phase + 0.3 * (l_e + r));
      ex.y_out.at(r, 1) = std::cos(phase + 0.3 * (l_e + r));
    }
    for (std::size_t r = 1; r < l_d; ++r) {
      ex.y_d.at(r, 0) = ex.y_out.at(r - 1, 0);
      ex.y_d.at(r, 1) = ex.y_out.at(r - 1, 1);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

TEST_CASE("lstm cell gradient check") {
  Rng rng(1);
  auto layer = make_lstm_layer(3, 4, rng);
  auto x = make_tensor({2, 3});
  auto h = make_tensor({2, 4});
  auto c = make_tensor({2, 4});
  for (auto& v : x->data) v = rng.normal(0.0, 0.5);
  for (auto& v : h->data) v = rng.normal(0.0, 0.5);
  for (auto& v : c->data) v = rng.normal(0.0, 0.5);
  auto check = finite_diff_check(
      [&] {
        auto [h1, c1] = lstm_cell(layer, x, h, c);
        auto [h2, c2] = lstm_cell(layer, x, h1, c1);
        (void)c2;
        return sum_all(mul(h2, h2));
      },
      {layer.wx, layer.uh, layer.b, x, h, c});
  CHECK(check.passed(1e-5));
}

TEST_CASE("forget-gate bias block is initialized to one") {
  Rng rng(2);
  auto layer = make_lstm_layer(5, 6, rng);
  // layout [i | f | o | c~]: forget block is columns [units, 2*units)
  for (std::size_t c = 6; c < 12; ++c) CHECK(layer.b->at(0, c) == 1.0);
  for (std::size_t c = 0; c < 6; ++c) CHECK(layer.b->at(0, c) != 1.0);
}

TEST_CASE("full miniature seq2seq gradient check, with and without attention") {
  auto examples = toy_examples(3, 4, 3, 2, 42);
  std::vector<const SequenceExample*> batch;
  for (const auto& ex : examples) batch.push_back(&ex);
  for (bool attention : {false, true}) {
    CAPTURE(attention);
    Seq2SeqLstm model(2, attention, 7, /*units=*/5, /*d_k=*/3);
    auto check = finite_diff_check([&] { return model.batch_loss(batch); }, model.params());
    CHECK(check.max_rel_err <= 1e-4);
  }
}

TEST_CASE("parameter names match the parameter list") {
  Seq2SeqLstm plain(3, false, 1, 4, 2);
  CHECK(plain.param_names().size() == plain.params().size());
  Seq2SeqLstm attn(3, true, 1, 4, 2);
  CHECK(attn.param_names().size() == attn.params().size());
  CHECK(attn.params().size() == plain.params().size() + 3);  // wq, wk, wv
}

TEST_CASE("forecast shape and teacher-forced consistency") {
  auto examples = toy_examples(1, 5, 4, 3, 3);
  Seq2SeqLstm model(3, true, 11, 6, 4);
  model.set_trained(true);
  Mat f = model.forecast(examples[0].x_e, 4);
  CHECK(f.rows == 4);
  CHECK(f.cols == 2);
  for (double v : f.v) CHECK(std::isfinite(v));

  // first decoder step sees the same zero token either way
  Mat tf = model.decode_teacher_forced(examples[0].x_e, examples[0].y_d);
  CHECK(f.at(0, 0) == doctest::Approx(tf.at(0, 0)).epsilon(1e-12));
  CHECK(f.at(0, 1) == doctest::Approx(tf.at(0, 1)).epsilon(1e-12));
}

TEST_CASE("attention weights are a distribution over encoder steps") {
  auto examples = toy_examples(1, 6, 3, 2, 9);
  Seq2SeqLstm model(2, true, 5, 6, 4);
  model.set_trained(true);
  auto res = model.decode_with_attention(examples[0].x_e, examples[0].y_d);
  REQUIRE(res.attention.rows == 3);
  REQUIRE(res.attention.cols == 6);
  for (std::size_t r = 0; r < 3; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(res.attention.at(r, c) >= 0.0);
      sum += res.attention.at(r, c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("training fits the toy task and early stopping records a best epoch") {
  auto examples = toy_examples(40, 5, 3, 2, 17);
  Seq2SeqLstm model(2, true, 21, 16, 8);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch = 8;
  cfg.lr = 5e-3;
  cfg.patience = 50;
  cfg.seed = 2;
  auto hist = model.train(examples, cfg);
  REQUIRE(!hist.train_loss.empty());
  CHECK(hist.train_loss.back() < hist.train_loss.front());
  CHECK(hist.best_val <= hist.val_loss.front());
  CHECK(model.trained());

  // autoregressive forecast should now track the smooth target reasonably
  double err = 0.0;
  for (const auto& ex : examples) {
    Mat f = model.forecast(ex.x_e, 3);
    for (std::size_t r = 0; r < 3; ++r)
      err += std::abs(f.at(r, 0) - ex.y_out.at(r, 0)) + std::abs(f.at(r, 1) - ex.y_out.at(r, 1));
  }
  err /= static_cast<double>(examples.size() * 6);
  CHECK(err < 0.35);
}

TEST_CASE("deterministic training: same seed, same parameters") {
  auto examples = toy_examples(12, 4, 2, 2, 5);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch = 4;
  cfg.seed = 3;
  cfg.val_fraction = 0.0;
  cfg.patience = 5;
  Seq2SeqLstm a(2, false, 77, 6, 4);
  Seq2SeqLstm b(2, false, 77, 6, 4);
  a.train(examples, cfg);
  b.train(examples, cfg);
  for (std::size_t i = 0; i < a.params().size(); ++i)
    for (std::size_t j = 0; j < a.params()[i]->data.size(); ++j)
      CHECK(a.params()[i]->data[j] == b.params()[i]->data[j]);
}

TEST_CASE("forecast before training is rejected") {
  Seq2SeqLstm model(2, false, 1, 4, 2);
  Mat x(5, 2);
  CHECK_THROWS(model.forecast(x, 3));
}
