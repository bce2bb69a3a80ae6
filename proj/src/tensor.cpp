#include "driftcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "driftcast/kernels.hpp"

namespace driftcast {

namespace {

std::size_t total_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

std::string shape_str(const Tensor& t) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) os << "x";
    os << t.shape[i];
  }
  os << "]";
  return os.str();
}

TensorPtr node(std::vector<std::size_t> shape, std::vector<TensorPtr> parents) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->data.assign(total_size(t->shape), 0.0);
  t->parents = std::move(parents);
  return t;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a) + " vs " + shape_str(b));
  }
}

// elementwise unary with derivative expressed in terms of (x, y)
TensorPtr unary(const TensorPtr& a, double (*fwd)(double),
                double (*dydx)(double x, double y)) {
  auto out = node(a->shape, {a});
  for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = fwd(a->data[i]);
  Tensor* o = out.get();
  Tensor* pa = a.get();
  out->backward_fn = [o, pa, dydx]() {
    pa->ensure_grad();
    for (std::size_t i = 0; i < o->size(); ++i)
      pa->grad[i] += o->grad[i] * dydx(pa->data[i], o->data[i]);
  };
  return out;
}

}  // namespace

TensorPtr make_tensor(std::vector<std::size_t> shape) {
  return node(std::move(shape), {});
}

TensorPtr make_tensor(std::vector<std::size_t> shape, std::vector<double> data) {
  auto t = node(std::move(shape), {});
  if (data.size() != t->size())
    throw std::invalid_argument("make_tensor: data length " +
                                std::to_string(data.size()) +
                                " does not match shape " + shape_str(*t));
  t->data = std::move(data);
  return t;
}

TensorPtr scalar_tensor(double v) { return make_tensor({1, 1}, {v}); }

TensorPtr glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  auto t = make_tensor({rows, cols});
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& x : t->data) x = rng.uniform(-limit, limit);
  return t;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
  if (a->cols() != b->rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ, " +
                                shape_str(*a) + " vs " + shape_str(*b));
  }
  const std::size_t m = a->rows(), k = a->cols(), n = b->cols();
  auto out = node({m, n}, {a, b});
  kernels::matmul_acc(a->data.data(), b->data.data(), out->data.data(), m, k, n);
  Tensor* o = out.get();
  Tensor* pa = a.get();
  Tensor* pb = b.get();
  out->backward_fn = [o, pa, pb, m, k, n]() {
    pa->ensure_grad();
    pb->ensure_grad();
    // dA += dC * B^T ; dB += A^T * dC
    kernels::matmul_nt_acc(o->grad.data(), pb->data.data(), pa->grad.data(), m, n, k);
    kernels::matmul_tn_acc(pa->data.data(), o->grad.data(), pb->grad.data(), k, m, n);
  };
  return out;
}

TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b) {
  if (a->cols() != b->cols()) {
    throw std::invalid_argument("matmul_nt: inner dimensions differ, " +
                                shape_str(*a) + " vs " + shape_str(*b));
  }
  const std::size_t m = a->rows(), k = a->cols(), n = b->rows();
  auto out = node({m, n}, {a, b});
  kernels::matmul_nt_acc(a->data.data(), b->data.data(), out->data.data(), m, k, n);
  Tensor* o = out.get();
  Tensor* pa = a.get();
  Tensor* pb = b.get();
  out->backward_fn = [o, pa, pb, m, k, n]() {
    pa->ensure_grad();
    pb->ensure_grad();
    // C = A B^T  =>  dA += dC * B ; dB += dC^T * A
    kernels::matmul_acc(o->grad.data(), pb->data.data(), pa->grad.data(), m, n, k);
    kernels::matmul_tn_acc(o->grad.data(), pa->data.data(), pb->grad.data(), n, m, k);
  };
  return out;
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
  require_same_shape("add", *a, *b);
  auto out = node(a->shape, {a, b});
  kernels::add(a->data.data(), b->data.data(), out->data.data(), out->size());
  Tensor* o = out.get();
  Tensor* pa = a.get();
  Tensor* pb = b.get();
  out->backward_fn = [o, pa, pb]() {
    pa->ensure_grad();
    pb->ensure_grad();
    kernels::axpy(1.0, o->grad.data(), pa->grad.data(), o->size());
    kernels::axpy(1.0, o->grad.data(), pb->grad.data(), o->size());
  };
  return out;
}

TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
  require_same_shape("sub", *a, *b);
  auto out = node(a->shape, {a, b});
  kernels::sub(a->data.data(), b->data.data(), out->data.data(), out->size());
  Tensor* o = out.get();
  Tensor* pa = a.get();
  Tensor* pb = b.get();
  out->backward_fn = [o, pa, pb]() {
    pa->ensure_grad();
    pb->ensure_grad();
    kernels::axpy(1.0, o->grad.data(), pa->grad.data(), o->size());
    kernels::axpy(-1.0, o->grad.data(), pb->grad.data(), o->size());
  };
  return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
  require_same_shape("mul", *a, *b);
  auto out = node(a->shape, {a, b});
  kernels::mul(a->data.data(), b->data.data(), out->data.data(), out->size());
  Tensor* o = out.get();
  Tensor* pa = a.get();
  Tensor* pb = b.get();
  out->backward_fn = [o, pa, pb]() {
    pa->ensure_grad();
    pb->ensure_grad();
    for (std::size_t i = 0; i < o->size(); ++i) {
      pa->grad[i] += o->grad[i] * pb->data[i];
      pb->grad[i] += o->grad[i] * pa->data[i];
    }
  };
  return out;
}

TensorPtr add_rowvec(const TensorPtr& a, const TensorPtr& v) {
  if (v->rows() != 1 || v->cols() != a->cols()) {
    throw std::invalid_argument("add_rowvec: " + shape_str(*a) + " vs " +
                                shape_str(*v));
  }
  const std::size_t m = a->rows(), n = a->cols();
  auto out = node(a->shape, {a, v});
  for (std::size_t i = 0; i < m; ++i)
    kernels::add(a->data.data() + i * n, v->data.data(),
                 out->data.data() + i * n, n);
  Tensor* o = out.get();
  Tensor* pa = a.get();
  Tensor* pv = v.get();
  out->backward_fn = [o, pa, pv, m, n]() {
    pa->ensure_grad();
    pv->ensure_grad();
    kernels::axpy(1.0, o->grad.data(), pa->grad.data(), m * n);
    for (std::size_t i = 0; i < m; ++i)
      kernels::axpy(1.0, o->grad.data() + i * n, pv->grad.data(), n);
  };
  return out;
}

TensorPtr mul_rowvec(const TensorPtr& a, const TensorPtr& v) {
  if (v->rows() != 1 || v->cols() != a->cols()) {
    throw std::invalid_argument("mul_rowvec: " + shape_str(*a) + " vs " +
                                shape_str(*v));
  }
  const std::size_t m = a->rows(), n = a->cols();
  auto out = node(a->shape, {a, v});
  for (std::size_t i = 0; i < m; ++i)
    kernels::mul(a->data.data() + i * n, v->data.data(),
                 out->data.data() + i * n, n);
  Tensor* o = out.get();
  Tensor* pa = a.get();
  Tensor* pv = v.get();
  out->backward_fn = [o, pa, pv, m, n]() {
    pa->ensure_grad();
    pv->ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        pa->grad[i * n + j] += o->grad[i * n + j] * pv->data[j];
        pv->grad[j] += o->grad[i * n + j] * pa->data[i * n + j];
      }
    }
  };
  return out;
}

TensorPtr scale(const TensorPtr& a, double s) {
  auto out = node(a->shape, {a});
  kernels::scale(a->data.data(), s, out->data.data(), out->size());
  Tensor* o = out.get();
  Tensor* pa = a.get();
  out->backward_fn = [o, pa, s]() {
    pa->ensure_grad();
    kernels::axpy(s, o->grad.data(), pa->grad.data(), o->size());
  };
  return out;
}

TensorPtr tanh(const TensorPtr& a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

TensorPtr sigmoid(const TensorPtr& a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

TensorPtr relu(const TensorPtr& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

TensorPtr exp(const TensorPtr& a) {
  return unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

TensorPtr softmax_rows(const TensorPtr& a) {
  const std::size_t m = a->rows(), n = a->cols();
  for (double x : a->data) {
    if (std::isnan(x))
      throw std::invalid_argument("softmax_rows: NaN in input");
  }
  auto out = node(a->shape, {a});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a->data.data() + i * n;
    double* orow = out->data.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (std::size_t j = 0; j < n; ++j) orow[j] /= sum;
  }
  Tensor* o = out.get();
  Tensor* pa = a.get();
  out->backward_fn = [o, pa, m, n]() {
    pa->ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = o->data.data() + i * n;
      const double* dy = o->grad.data() + i * n;
      const double dot = kernels::dot(y, dy, n);
      for (std::size_t j = 0; j < n; ++j)
        pa->grad[i * n + j] += y[j] * (dy[j] - dot);
    }
  };
  return out;
}

TensorPtr causal_softmax_rows(const TensorPtr& a) {
  const std::size_t m = a->rows(), n = a->cols();
  if (m != n)
    throw std::invalid_argument("causal_softmax_rows: input must be square, got " +
                                shape_str(*a));
  auto out = node(a->shape, {a});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a->data.data() + i * n;
    double* orow = out->data.data() + i * n;
    const double mx = *std::max_element(row, row + i + 1);
    double sum = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (std::size_t j = 0; j <= i; ++j) orow[j] /= sum;
    // columns j > i stay exactly zero
  }
  Tensor* o = out.get();
  Tensor* pa = a.get();
  out->backward_fn = [o, pa, m, n]() {
    pa->ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = o->data.data() + i * n;
      const double* dy = o->grad.data() + i * n;
      const double dot = kernels::dot(y, dy, i + 1);
      for (std::size_t j = 0; j <= i; ++j)
        pa->grad[i * n + j] += y[j] * (dy[j] - dot);
    }
  };
  return out;
}

TensorPtr layer_norm_rows(const TensorPtr& a, double eps) {
  const std::size_t m = a->rows(), n = a->cols();
  auto out = node(a->shape, {a});
  std::vector<double> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a->data.data() + i * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += row[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = row[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    double* orow = out->data.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) orow[j] = (row[j] - mean) * inv_std[i];
  }
  Tensor* o = out.get();
  Tensor* pa = a.get();
  out->backward_fn = [o, pa, m, n, inv_std = std::move(inv_std)]() {
    pa->ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = o->data.data() + i * n;
      const double* dy = o->grad.data() + i * n;
      double mean_dy = 0.0, mean_dyy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        mean_dy += dy[j];
        mean_dyy += dy[j] * y[j];
      }
      mean_dy /= static_cast<double>(n);
      mean_dyy /= static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j)
        pa->grad[i * n + j] += inv_std[i] * (dy[j] - mean_dy - y[j] * mean_dyy);
    }
  };
  return out;
}

TensorPtr concat_cols(const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty input");
  const std::size_t m = parts[0]->rows();
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p->rows() != m)
      throw std::invalid_argument("concat_cols: row count mismatch");
    n += p->cols();
  }
  auto out = node({m, n}, parts);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t pc = p->cols();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(p->data.data() + i * pc, pc, out->data.data() + i * n + off);
    off += pc;
  }
  Tensor* o = out.get();
  out->backward_fn = [o, m, n]() {
    std::size_t off = 0;
    for (auto& p : o->parents) {
      p->ensure_grad();
      const std::size_t pc = p->cols();
      for (std::size_t i = 0; i < m; ++i)
        kernels::axpy(1.0, o->grad.data() + i * n + off,
                      p->grad.data() + i * pc, pc);
      off += pc;
    }
  };
  return out;
}

TensorPtr concat_rows(const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty input");
  const std::size_t n = parts[0]->cols();
  std::size_t m = 0;
  for (const auto& p : parts) {
    if (p->cols() != n)
      throw std::invalid_argument("concat_rows: column count mismatch");
    m += p->rows();
  }
  auto out = node({m, n}, parts);
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy_n(p->data.data(), p->size(), out->data.data() + off);
    off += p->size();
  }
  Tensor* o = out.get();
  out->backward_fn = [o]() {
    std::size_t off = 0;
    for (auto& p : o->parents) {
      p->ensure_grad();
      kernels::axpy(1.0, o->grad.data() + off, p->grad.data(), p->size());
      off += p->size();
    }
  };
  return out;
}

TensorPtr slice_cols(const TensorPtr& a, std::size_t c0, std::size_t c1) {
  if (c0 >= c1 || c1 > a->cols())
    throw std::invalid_argument("slice_cols: bad range");
  const std::size_t m = a->rows(), n = a->cols(), w = c1 - c0;
  auto out = node({m, w}, {a});
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(a->data.data() + i * n + c0, w, out->data.data() + i * w);
  Tensor* o = out.get();
  Tensor* pa = a.get();
  out->backward_fn = [o, pa, m, n, w, c0]() {
    pa->ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      kernels::axpy(1.0, o->grad.data() + i * w, pa->grad.data() + i * n + c0, w);
  };
  return out;
}

TensorPtr slice_rows(const TensorPtr& a, std::size_t r0, std::size_t r1) {
  if (r0 >= r1 || r1 > a->rows())
    throw std::invalid_argument("slice_rows: bad range");
  const std::size_t n = a->cols(), m = r1 - r0;
  auto out = node({m, n}, {a});
  std::copy_n(a->data.data() + r0 * n, m * n, out->data.data());
  Tensor* o = out.get();
  Tensor* pa = a.get();
  out->backward_fn = [o, pa, r0, m, n]() {
    pa->ensure_grad();
    kernels::axpy(1.0, o->grad.data(), pa->grad.data() + r0 * n, m * n);
  };
  return out;
}

TensorPtr sum_all(const TensorPtr& a) {
  auto out = node({1, 1}, {a});
  double s = 0.0;
  for (double x : a->data) s += x;
  out->data[0] = s;
  Tensor* o = out.get();
  Tensor* pa = a.get();
  out->backward_fn = [o, pa]() {
    pa->ensure_grad();
    const double g = o->grad[0];
    for (std::size_t i = 0; i < pa->size(); ++i) pa->grad[i] += g;
  };
  return out;
}

TensorPtr mean_all(const TensorPtr& a) {
  return scale(sum_all(a), 1.0 / static_cast<double>(a->size()));
}

TensorPtr mse_loss(const TensorPtr& pred, const std::vector<double>& target) {
  if (pred->size() != target.size())
    throw std::invalid_argument("mse_loss: size mismatch");
  auto t = make_tensor(pred->shape, target);
  auto diff = sub(pred, t);
  return mean_all(mul(diff, diff));
}

void backward(const TensorPtr& root) {
  if (root->size() != 1)
    throw std::invalid_argument("backward: root must be scalar");
  // iterative post-order DFS
  std::vector<Tensor*> order;
  std::unordered_set<Tensor*> visited;
  std::vector<std::pair<Tensor*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [t, idx] = stack.back();
    if (idx < t->parents.size()) {
      Tensor* p = t->parents[idx++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(t);
      stack.pop_back();
    }
  }
  root->ensure_grad();
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Tensor* t = *it;
    if (t->backward_fn && !t->grad.empty()) t->backward_fn();
  }
}

void adam_step(const TensorPtr& param, AdamState& state) {
  if (param->grad.size() != param->data.size())
    throw std::invalid_argument("adam_step: parameter has no gradient");
  const std::size_t n = param->size();
  if (state.m.size() != n) state.m.assign(n, 0.0);
  if (state.v.size() != n) state.v.assign(n, 0.0);
  state.t += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = param->grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    param->data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
  param->grad.clear();
}

GradCheckReport finite_diff_check(const std::function<TensorPtr()>& f,
                                  const std::vector<TensorPtr>& params,
                                  double h) {
  for (const auto& p : params) p->grad.clear();
  auto root = f();
  backward(root);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    p->ensure_grad();
    analytic.push_back(p->grad);
    p->grad.clear();
  }
  GradCheckReport rep;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double orig = p->data[i];
      p->data[i] = orig + h;
      const double fp = f()->data[0];
      p->data[i] = orig - h;
      const double fm = f()->data[0];
      p->data[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[pi][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1.0});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_param = pi;
        rep.worst_index = i;
        rep.analytic = a;
        rep.numeric = numeric;
      }
    }
  }
  return rep;
}

}  // namespace driftcast
