#pragma once

// Dense 64-bit tensors with reverse-mode gradient accumulation. Each op
// returns a new node that remembers its parents and a closure accumulating
// parent gradients; backward() walks the graph in reverse topological order.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "driftcast/rng.hpp"

namespace driftcast {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until backward touches this node

  std::vector<TensorPtr> parents;
  std::function<void()> backward_fn;

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
  void zero_grad() {
    if (!grad.empty()) grad.assign(data.size(), 0.0);
  }
};

// --- construction ---

TensorPtr make_tensor(std::vector<std::size_t> shape);
TensorPtr make_tensor(std::vector<std::size_t> shape, std::vector<double> data);
TensorPtr scalar_tensor(double v);
// Glorot-uniform initialization, limit sqrt(6 / (fan_in + fan_out)).
TensorPtr glorot(std::size_t rows, std::size_t cols, Rng& rng);

// --- graph ops (all 2-D row-major; 1-D treated as 1 x n) ---

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
// a * b^T where b is (n x k): used for attention scores.
TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b);

TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);
// broadcasts a 1 x n row vector over every row of a (m x n)
TensorPtr add_rowvec(const TensorPtr& a, const TensorPtr& v);
TensorPtr mul_rowvec(const TensorPtr& a, const TensorPtr& v);
TensorPtr scale(const TensorPtr& a, double s);

TensorPtr tanh(const TensorPtr& a);
TensorPtr sigmoid(const TensorPtr& a);
TensorPtr relu(const TensorPtr& a);
TensorPtr exp(const TensorPtr& a);

// Row-wise softmax with max-subtraction. Throws on NaN input.
TensorPtr softmax_rows(const TensorPtr& a);
// Softmax over columns j <= i only (square input); columns j > i get weight 0.
TensorPtr causal_softmax_rows(const TensorPtr& a);

// Per-row normalization to zero mean / unit variance (no learnable terms;
// compose with mul_rowvec/add_rowvec for gain and offset).
TensorPtr layer_norm_rows(const TensorPtr& a, double eps = 1e-10);

TensorPtr concat_cols(const std::vector<TensorPtr>& parts);
TensorPtr concat_rows(const std::vector<TensorPtr>& parts);
TensorPtr slice_cols(const TensorPtr& a, std::size_t c0, std::size_t c1);
TensorPtr slice_rows(const TensorPtr& a, std::size_t r0, std::size_t r1);

TensorPtr sum_all(const TensorPtr& a);
TensorPtr mean_all(const TensorPtr& a);
// mean over elements of squared difference; target is a constant
TensorPtr mse_loss(const TensorPtr& pred, const std::vector<double>& target);

// Runs reverse-mode accumulation from a scalar root.
void backward(const TensorPtr& root);

// --- optimizer ---

struct AdamState {
  std::vector<double> m, v;
  std::size_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update; requires param->grad to be populated and clears
// it afterwards.
void adam_step(const TensorPtr& param, AdamState& state);

// --- gradient verification ---

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool passed(double tol) const { return max_rel_err <= tol; }
};

// f rebuilds a scalar-valued graph from the given leaves on every call.
// Compares reverse-mode gradients against central differences of step h.
GradCheckReport finite_diff_check(const std::function<TensorPtr()>& f,
                                  const std::vector<TensorPtr>& params,
                                  double h = 1e-5);

}  // namespace driftcast
