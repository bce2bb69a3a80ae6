#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "driftcast/tensor.hpp"

using namespace driftcast;

namespace {

TensorPtr randn(std::size_t r, std::size_t c, Rng& rng, double s = 0.5) {
  auto t = make_tensor({r, c});
  for (auto& v : t->data) v = rng.normal(0.0, s);
  return t;
}

}  // namespace

TEST_CASE("matmul forward matches a hand computation") {
  auto a = make_tensor({2, 3}, {1, 2, 3, 4, 5, 6});
  auto b = make_tensor({3, 2}, {7, 8, 9, 10, 11, 12});
  auto c = matmul(a, b);
  CHECK(c->at(0, 0) == doctest::Approx(58));
  CHECK(c->at(0, 1) == doctest::Approx(64));
  CHECK(c->at(1, 0) == doctest::Approx(139));
  CHECK(c->at(1, 1) == doctest::Approx(154));
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
  auto a = make_tensor({2, 4}, {1, 2, 3, 4, -1, 0, 1, 2});
  auto s = softmax_rows(a);
  for (std::size_t r = 0; r < 2; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 4; ++c) sum += s->at(r, c);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto shifted = make_tensor({2, 4}, {101, 102, 103, 104, 99, 100, 101, 102});
  auto s2 = softmax_rows(shifted);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(s2->data[i] == doctest::Approx(s->data[i]).epsilon(1e-12));
}

TEST_CASE("softmax throws on NaN input") {
  auto a = make_tensor({1, 2}, {0.0, std::nan("")});
  CHECK_THROWS(softmax_rows(a));
}

TEST_CASE("causal softmax zeroes the strict upper triangle") {
  Rng rng(3);
  auto a = randn(5, 5, rng);
  auto s = causal_softmax_rows(a);
  for (std::size_t r = 0; r < 5; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 5; ++c) {
      if (c > r) CHECK(s->at(r, c) == 0.0);
      sum += s->at(r, c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("layer norm rows produce zero mean unit variance") {
  Rng rng(5);
  auto a = randn(4, 7, rng, 3.0);
  auto n = layer_norm_rows(a);
  for (std::size_t r = 0; r < 4; ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < 7; ++c) mean += n->at(r, c);
    mean /= 7.0;
    for (std::size_t c = 0; c < 7; ++c) var += (n->at(r, c) - mean) * (n->at(r, c) - mean);
    var /= 7.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("gradient checks across the op set") {
  Rng rng(11);

  SUBCASE("matmul chain") {
    auto a = randn(3, 4, rng);
    auto b = randn(4, 5, rng);
    auto check = finite_diff_check([&] { return sum_all(tanh(matmul(a, b))); }, {a, b});
    CHECK(check.passed(1e-6));
  }

  SUBCASE("matmul_nt") {
    auto a = randn(3, 4, rng);
    auto b = randn(5, 4, rng);
    auto check = finite_diff_check([&] { return mean_all(matmul_nt(a, b)); }, {a, b});
    CHECK(check.passed(1e-6));
  }

  SUBCASE("elementwise + broadcasts") {
    auto a = randn(4, 6, rng);
    auto b = randn(4, 6, rng);
    auto v = randn(1, 6, rng);
    auto check = finite_diff_check(
        [&] {
          auto x = mul(add(a, b), sub(a, b));
          return sum_all(add_rowvec(mul_rowvec(x, v), v));
        },
        {a, b, v});
    CHECK(check.passed(1e-6));
  }

  SUBCASE("activations") {
    auto a = randn(3, 5, rng);
    auto check = finite_diff_check(
        [&] { return sum_all(mul(sigmoid(a), add(tanh(a), exp(scale(a, 0.3))))); }, {a});
    CHECK(check.passed(1e-6));
  }

  SUBCASE("relu away from the kink") {
    auto a = make_tensor({2, 3}, {0.5, -0.7, 1.2, -0.4, 2.0, -1.5});
    auto check = finite_diff_check([&] { return sum_all(relu(a)); }, {a});
    CHECK(check.passed(1e-6));
  }

  SUBCASE("softmax") {
    auto a = randn(3, 4, rng);
    auto w = randn(3, 4, rng);
    auto check = finite_diff_check([&] { return sum_all(mul(softmax_rows(a), w)); }, {a});
    CHECK(check.passed(1e-5));
  }

  SUBCASE("causal softmax") {
    auto a = randn(4, 4, rng);
    auto w = randn(4, 4, rng);
    auto check = finite_diff_check([&] { return sum_all(mul(causal_softmax_rows(a), w)); }, {a});
    CHECK(check.passed(1e-5));
  }

  SUBCASE("layer norm") {
    auto a = randn(3, 6, rng);
    auto w = randn(3, 6, rng);
    auto check = finite_diff_check([&] { return sum_all(mul(layer_norm_rows(a), w)); }, {a});
    CHECK(check.passed(1e-5));
  }

  SUBCASE("concat and slice") {
    auto a = randn(2, 3, rng);
    auto b = randn(2, 2, rng);
    auto c = randn(1, 5, rng);
    auto check = finite_diff_check(
        [&] {
          auto cc = concat_cols({a, b});
          auto rr = concat_rows({cc, c});
          return sum_all(mul(slice_cols(rr, 1, 4), slice_cols(rr, 0, 3)));
        },
        {a, b, c});
    CHECK(check.passed(1e-6));
  }

  SUBCASE("slice rows") {
    auto a = randn(5, 3, rng);
    auto check = finite_diff_check(
        [&] { return sum_all(mul(slice_rows(a, 0, 2), slice_rows(a, 3, 5))); }, {a});
    CHECK(check.passed(1e-6));
  }

  SUBCASE("mse loss") {
    auto a = randn(3, 2, rng);
    std::vector<double> target = {0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
    auto check = finite_diff_check([&] { return mse_loss(tanh(a), target); }, {a});
    CHECK(check.passed(1e-6));
  }

  SUBCASE("shared subexpression (diamond graph)") {
    auto a = randn(3, 3, rng);
    auto check = finite_diff_check(
        [&] {
          auto h = tanh(a);
          return sum_all(mul(h, h));  // grad must accumulate through both uses
        },
        {a});
    CHECK(check.passed(1e-6));
  }
}

TEST_CASE("mse loss value matches the direct formula") {
  auto pred = make_tensor({2, 2}, {1.0, 2.0, 3.0, 4.0});
  std::vector<double> target = {1.5, 1.5, 2.0, 5.0};
  auto loss = mse_loss(pred, target);
  // mean of (0.25, 0.25, 1.0, 1.0)
  CHECK(loss->data[0] == doctest::Approx(0.625));
}

TEST_CASE("adam converges on a quadratic and clears gradients") {
  auto x = make_tensor({1, 2}, {5.0, -3.0});
  AdamState st;
  st.lr = 0.1;
  for (int i = 0; i < 500; ++i) {
    auto loss = sum_all(mul(x, x));
    backward(loss);
    adam_step(x, st);
    for (double g : x->grad) CHECK(g == 0.0);  // gradient consumed by the step
  }
  CHECK(std::abs(x->data[0]) < 1e-3);
  CHECK(std::abs(x->data[1]) < 1e-3);
}

TEST_CASE("adam throws when the gradient is missing") {
  auto x = make_tensor({1, 2}, {1.0, 2.0});
  AdamState st;
  CHECK_THROWS(adam_step(x, st));
}

TEST_CASE("glorot init stays inside the limit") {
  Rng rng(17);
  auto w = glorot(20, 30, rng);
  const double limit = std::sqrt(6.0 / (20 + 30));
  for (double v : w->data) {
    CHECK(v <= limit);
    CHECK(v >= -limit);
  }
}

TEST_CASE("shape mismatches are rejected") {
  auto a = make_tensor({2, 3});
  auto b = make_tensor({2, 4});
  CHECK_THROWS(add(a, b));
  CHECK_THROWS(matmul(a, b));
  CHECK_THROWS(concat_rows({a, b}));
}
