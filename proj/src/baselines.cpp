#include "driftcast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "driftcast/rng.hpp"

namespace driftcast {

// ---------------------------------------------------------------- curve fit

std::vector<double> cumtrapz(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() != v.size()) throw std::invalid_argument("cumtrapz: length mismatch");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
  return out;
}

std::vector<double> solve_least_squares(const Mat& a, const std::vector<double>& b,
                                        double* condition) {
  const std::size_t m = a.rows, n = a.cols;
  if (b.size() != m) throw std::invalid_argument("least squares: rhs length mismatch");
  if (m < n) throw std::invalid_argument("least squares: underdetermined system");

  // Householder QR, applied in place to copies of A and b.
  Mat r = a;
  std::vector<double> y = b;
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += r.at(i, k) * r.at(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;  // caught by the condition check below
    const double alpha = r.at(k, k) >= 0.0 ? -norm : norm;
    std::vector<double> u(m - k, 0.0);
    u[0] = r.at(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) u[i - k] = r.at(i, k);
    double unorm2 = 0.0;
    for (double x : u) unorm2 += x * x;
    if (unorm2 == 0.0) continue;
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += u[i - k] * r.at(i, j);
      const double s = 2.0 * dot / unorm2;
      for (std::size_t i = k; i < m; ++i) r.at(i, j) -= s * u[i - k];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < m; ++i) dot += u[i - k] * y[i];
    const double s = 2.0 * dot / unorm2;
    for (std::size_t i = k; i < m; ++i) y[i] -= s * u[i - k];
  }

  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double d = std::abs(r.at(k, k));
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
  }
  const double cond = (dmin > 0.0) ? dmax / dmin : std::numeric_limits<double>::infinity();
  if (condition != nullptr) *condition = cond;
  if (!(dmin > dmax * 1e-12)) {
    throw std::runtime_error("least squares design is rank deficient (condition estimate " +
                             std::to_string(cond) + ")");
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double s = y[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= r.at(k, j) * x[j];
    x[k] = s / r.at(k, k);
  }
  return x;
}

CurveFitCoeffs curvefit_fit(const std::vector<double>& t, const std::vector<Vec2>& v_w,
                            const std::vector<Vec2>& v_a, const std::vector<Vec2>& d) {
  const std::size_t n = t.size();
  if (v_w.size() != n || v_a.size() != n || d.size() != n)
    throw std::invalid_argument("curve fit: series length mismatch");
  if (n < 3) throw std::invalid_argument("curve fit: need at least 3 rows");

  CurveFitCoeffs coeffs;
  double worst_cond = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<double> vw(n), va(n), dd(n);
    for (std::size_t i = 0; i < n; ++i) {
      vw[i] = v_w[i][axis];
      va[i] = v_a[i][axis];
      dd[i] = d[i][axis];
    }
    const auto iw = cumtrapz(t, vw);
    const auto ia = cumtrapz(t, va);
    Mat design(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      design.at(i, 0) = iw[i];
      design.at(i, 1) = ia[i];
      design.at(i, 2) = t[i];
    }
    double cond = 0.0;
    const auto c = solve_least_squares(design, dd, &cond);
    worst_cond = std::max(worst_cond, cond);
    auto& slot = (axis == 0) ? coeffs.cx : coeffs.cy;
    slot = {c[0], c[1], c[2]};
  }
  coeffs.condition = worst_cond;
  return coeffs;
}

CurveFitCoeffs curvefit_fit(const DriftSeries& series) {
  std::vector<double> t;
  std::vector<Vec2> vw, va;
  t.reserve(series.env.size());
  for (const auto& e : series.env) {
    t.push_back(e.t);
    vw.push_back(e.current);
    va.push_back(e.wind);
  }
  return curvefit_fit(t, vw, va, series.position);
}

std::vector<Vec2> curvefit_predict(const CurveFitCoeffs& coeffs, const std::vector<double>& t,
                                   const std::vector<Vec2>& v_w, const std::vector<Vec2>& v_a) {
  const std::size_t n = t.size();
  if (v_w.size() != n || v_a.size() != n)
    throw std::invalid_argument("curve fit predict: series length mismatch");
  std::vector<Vec2> out(n);
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<double> vw(n), va(n);
    for (std::size_t i = 0; i < n; ++i) {
      vw[i] = v_w[i][axis];
      va[i] = v_a[i][axis];
    }
    const auto iw = cumtrapz(t, vw);
    const auto ia = cumtrapz(t, va);
    const auto& c = (axis == 0) ? coeffs.cx : coeffs.cy;
    for (std::size_t i = 0; i < n; ++i) out[i][axis] = c[0] * iw[i] + c[1] * ia[i] + c[2] * t[i];
  }
  return out;
}

std::vector<Vec2> curvefit_predict(const CurveFitCoeffs& coeffs, const DriftSeries& series) {
  std::vector<double> t;
  std::vector<Vec2> vw, va;
  for (const auto& e : series.env) {
    t.push_back(e.t);
    vw.push_back(e.current);
    va.push_back(e.wind);
  }
  return curvefit_predict(coeffs, t, vw, va);
}

// -------------------------------------------------------------- persistence

Mat persistence_forecast(const Vec2& last_pos, const Vec2& prev_pos, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("persistence: steps must be positive");
  const Vec2 delta{last_pos[0] - prev_pos[0], last_pos[1] - prev_pos[1]};
  Mat out(steps, 2);
  for (std::size_t u = 0; u < steps; ++u) {
    out.at(u, 0) = last_pos[0] + static_cast<double>(u + 1) * delta[0];
    out.at(u, 1) = last_pos[1] + static_cast<double>(u + 1) * delta[1];
  }
  return out;
}

// ----------------------------------------------------------- one-step windows

OneStepDataset make_onestep_windows(const Mat& features, const Mat& positions, std::size_t l_e) {
  if (features.rows != positions.rows)
    throw std::invalid_argument("one-step windows: row mismatch");
  if (positions.cols != 2) throw std::invalid_argument("one-step windows: need 2 target columns");
  if (features.rows < l_e + 1)
    throw std::invalid_argument("one-step windows: series shorter than l_e + 1");
  OneStepDataset ds;
  const std::size_t cols = features.cols + 2;
  for (std::size_t i = 0; i + l_e < features.rows; ++i) {
    Mat w(l_e, cols);
    for (std::size_t r = 0; r < l_e; ++r) {
      std::copy(features.row(i + r), features.row(i + r) + features.cols, w.row(r));
      w.at(r, features.cols) = positions.at(i + r, 0);
      w.at(r, features.cols + 1) = positions.at(i + r, 1);
    }
    ds.windows.push_back(std::move(w));
    ds.targets.push_back({positions.at(i + l_e, 0), positions.at(i + l_e, 1)});
  }
  return ds;
}

// ------------------------------------------------------------ shared trainer

namespace {

TensorPtr timestep_batch(const std::vector<const Mat*>& batch, std::size_t t) {
  const std::size_t cols = batch.front()->cols;
  auto x = make_tensor({batch.size(), cols});
  for (std::size_t bi = 0; bi < batch.size(); ++bi)
    std::copy(batch[bi]->row(t), batch[bi]->row(t) + cols, x->data.begin() + bi * cols);
  return x;
}

TrainHistory train_onestep(
    const OneStepDataset& data, const BaselineTrainConfig& cfg, std::vector<TensorPtr>& params,
    const std::function<TensorPtr(const std::vector<const Mat*>&, bool)>& fwd) {
  if (data.windows.size() != data.targets.size())
    throw std::invalid_argument("window/target count mismatch");
  auto loss_fn = [&](const std::vector<std::size_t>& idx, bool training) {
    std::vector<const Mat*> batch;
    std::vector<double> target;
    for (std::size_t i : idx) {
      batch.push_back(&data.windows[i]);
      target.push_back(data.targets[i][0]);
      target.push_back(data.targets[i][1]);
    }
    return mse_loss(fwd(batch, training), target);
  };
  return run_training(data.windows.size(), cfg, params, loss_fn);
}

}  // namespace

// ---------------------------------------------------------------------- RNN

RnnBaseline::RnnBaseline(std::size_t input_dim, std::uint64_t seed, std::size_t units1,
                         std::size_t units2)
    : input_dim_(input_dim), units1_(units1), units2_(units2) {
  Rng rng(seed);
  w1_ = glorot(input_dim, units1, rng);
  u1_ = glorot(units1, units1, rng);
  b1_ = make_tensor({1, units1});
  w2_ = glorot(units1, units2, rng);
  u2_ = glorot(units2, units2, rng);
  b2_ = make_tensor({1, units2});
  wo_ = glorot(units2, 2, rng);
  bo_ = make_tensor({1, 2});
  params_ = {w1_, u1_, b1_, w2_, u2_, b2_, wo_, bo_};
}

TensorPtr RnnBaseline::forward(const std::vector<const Mat*>& batch) const {
  const std::size_t bsz = batch.size();
  const std::size_t steps = batch.front()->rows;
  for (const Mat* m : batch)
    if (m->cols != input_dim_ || m->rows != steps)
      throw std::invalid_argument("rnn: window shape mismatch");
  TensorPtr h1 = make_tensor({bsz, units1_});
  TensorPtr h2 = make_tensor({bsz, units2_});
  for (std::size_t t = 0; t < steps; ++t) {
    auto x = timestep_batch(batch, t);
    h1 = tanh(add_rowvec(add(matmul(x, w1_), matmul(h1, u1_)), b1_));
    h2 = tanh(add_rowvec(add(matmul(h1, w2_), matmul(h2, u2_)), b2_));
  }
  return add_rowvec(matmul(h2, wo_), bo_);
}

TrainHistory RnnBaseline::train(const OneStepDataset& data, const BaselineTrainConfig& cfg) {
  auto hist = train_onestep(data, cfg, params_,
                            [this](const std::vector<const Mat*>& b, bool) { return forward(b); });
  trained_ = true;
  return hist;
}

Vec2 RnnBaseline::predict(const Mat& window) const {
  if (!trained_) throw std::logic_error("rnn: predict before training");
  auto out = forward({&window});
  return {out->data[0], out->data[1]};
}

namespace {

Mat roll_net(const std::function<Vec2(const Mat&)>& step, const Mat& window,
             const Mat& future_features) {
  const std::size_t feat_cols = window.cols - 2;
  if (future_features.cols != feat_cols)
    throw std::invalid_argument("rollout: future feature width mismatch");
  Mat w = window;
  Mat out(future_features.rows, 2);
  for (std::size_t s = 0; s < future_features.rows; ++s) {
    const Vec2 pred = step(w);
    out.at(s, 0) = pred[0];
    out.at(s, 1) = pred[1];
    // shift the window up one step and append [future features ‖ prediction]
    for (std::size_t r = 0; r + 1 < w.rows; ++r)
      std::copy(w.row(r + 1), w.row(r + 1) + w.cols, w.row(r));
    double* last = w.row(w.rows - 1);
    std::copy(future_features.row(s), future_features.row(s) + feat_cols, last);
    last[feat_cols] = pred[0];
    last[feat_cols + 1] = pred[1];
  }
  return out;
}

}  // namespace

Mat RnnBaseline::roll_forward(const Mat& window, const Mat& future_features) const {
  return roll_net([this](const Mat& w) { return predict(w); }, window, future_features);
}

std::vector<std::string> RnnBaseline::param_names() const {
  return {"w1", "u1", "b1", "w2", "u2", "b2", "wo", "bo"};
}

// ---------------------------------------------------------------------- TCN

TensorPtr conv1d_causal(const TensorPtr& x, const TensorPtr& w, const TensorPtr& bias,
                        std::size_t kernel, std::size_t dilation) {
  const std::size_t steps = x->rows();
  const std::size_t c_in = x->cols();
  const std::size_t c_out = w->cols();
  if (w->rows() != kernel * c_in)
    throw std::invalid_argument("conv1d: weight rows must equal kernel * c_in");
  if (bias->rows() != 1 || bias->cols() != c_out)
    throw std::invalid_argument("conv1d: bias must be 1 x c_out");
  if (dilation == 0 || kernel == 0) throw std::invalid_argument("conv1d: zero kernel/dilation");

  auto out = std::make_shared<Tensor>();
  out->shape = {steps, c_out};
  out->data.assign(steps * c_out, 0.0);
  out->parents = {x, w, bias};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t co = 0; co < c_out; ++co) out->at(t, co) = bias->data[co];
    for (std::size_t k = 0; k < kernel; ++k) {
      const std::size_t back = k * dilation;
      if (back > t) break;  // zero padding past the sequence start
      const std::size_t src = t - back;
      for (std::size_t ci = 0; ci < c_in; ++ci) {
        const double xv = x->at(src, ci);
        if (xv == 0.0) continue;
        const double* wrow = w->data.data() + (k * c_in + ci) * c_out;
        for (std::size_t co = 0; co < c_out; ++co) out->at(t, co) += xv * wrow[co];
      }
    }
  }
  Tensor* o = out.get();
  Tensor* px = x.get();
  Tensor* pw = w.get();
  Tensor* pb = bias.get();
  out->backward_fn = [o, px, pw, pb, kernel, dilation, steps, c_in, c_out]() {
    px->ensure_grad();
    pw->ensure_grad();
    pb->ensure_grad();
    for (std::size_t t = 0; t < steps; ++t) {
      const double* go = o->grad.data() + t * c_out;
      for (std::size_t co = 0; co < c_out; ++co) pb->grad[co] += go[co];
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::size_t back = k * dilation;
        if (back > t) break;
        const std::size_t src = t - back;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
          const double xv = px->data[src * c_in + ci];
          const double* wrow = pw->data.data() + (k * c_in + ci) * c_out;
          double* gwrow = pw->grad.data() + (k * c_in + ci) * c_out;
          double gx = 0.0;
          for (std::size_t co = 0; co < c_out; ++co) {
            gwrow[co] += xv * go[co];
            gx += wrow[co] * go[co];
          }
          px->grad[src * c_in + ci] += gx;
        }
      }
    }
  };
  return out;
}

TensorPtr batch_norm_train(const TensorPtr& x, const TensorPtr& gamma, const TensorPtr& beta,
                           std::vector<double>* batch_mean, std::vector<double>* batch_var,
                           double eps) {
  const std::size_t n = x->rows(), c = x->cols();
  if (gamma->cols() != c || beta->cols() != c)
    throw std::invalid_argument("batch norm: affine width mismatch");
  if (n == 0) throw std::invalid_argument("batch norm: empty batch");

  std::vector<double> mu(c, 0.0), var(c, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < c; ++j) mu[j] += x->at(r, j);
  for (double& m : mu) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < c; ++j) {
      const double d = x->at(r, j) - mu[j];
      var[j] += d * d;
    }
  for (double& v : var) v /= static_cast<double>(n);
  if (batch_mean != nullptr) *batch_mean = mu;
  if (batch_var != nullptr) *batch_var = var;

  auto out = std::make_shared<Tensor>();
  out->shape = {n, c};
  out->data.assign(n * c, 0.0);
  out->parents = {x, gamma, beta};
  std::vector<double> inv_sigma(c);
  for (std::size_t j = 0; j < c; ++j) inv_sigma[j] = 1.0 / std::sqrt(var[j] + eps);
  // keep normalized values for the backward pass
  auto xhat = std::make_shared<std::vector<double>>(n * c);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < c; ++j) {
      const double h = (x->at(r, j) - mu[j]) * inv_sigma[j];
      (*xhat)[r * c + j] = h;
      out->at(r, j) = gamma->data[j] * h + beta->data[j];
    }
  Tensor* o = out.get();
  Tensor* px = x.get();
  Tensor* pg = gamma.get();
  Tensor* pbt = beta.get();
  out->backward_fn = [o, px, pg, pbt, xhat, inv_sigma, n, c]() {
    px->ensure_grad();
    pg->ensure_grad();
    pbt->ensure_grad();
    for (std::size_t j = 0; j < c; ++j) {
      double sum_dy = 0.0, sum_dyh = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double dy = o->grad[r * c + j];
        sum_dy += dy;
        sum_dyh += dy * (*xhat)[r * c + j];
        pg->grad[j] += dy * (*xhat)[r * c + j];
        pbt->grad[j] += dy;
      }
      const double mean_dy = sum_dy / static_cast<double>(n);
      const double mean_dyh = sum_dyh / static_cast<double>(n);
      const double g = pg->data[j] * inv_sigma[j];
      for (std::size_t r = 0; r < n; ++r) {
        const double dy = o->grad[r * c + j];
        px->grad[r * c + j] += g * (dy - mean_dy - (*xhat)[r * c + j] * mean_dyh);
      }
    }
  };
  return out;
}

TensorPtr batch_norm_eval(const TensorPtr& x, const TensorPtr& gamma, const TensorPtr& beta,
                          const std::vector<double>& mean, const std::vector<double>& var,
                          double eps) {
  const std::size_t c = x->cols();
  if (mean.size() != c || var.size() != c)
    throw std::invalid_argument("batch norm eval: statistics width mismatch");
  // affine in x: express with existing ops so gradients still flow if needed
  std::vector<double> scale_v(c), shift_v(c);
  for (std::size_t j = 0; j < c; ++j) {
    scale_v[j] = 1.0 / std::sqrt(var[j] + eps);
    shift_v[j] = -mean[j] * scale_v[j];
  }
  auto sc = make_tensor({1, c}, scale_v);
  auto sh = make_tensor({1, c}, shift_v);
  auto normed = add_rowvec(mul_rowvec(x, sc), sh);
  return add_rowvec(mul_rowvec(normed, gamma), beta);
}

TcnBaseline::TcnBaseline(std::size_t input_dim, std::uint64_t seed, std::size_t channels,
                         std::size_t kernel, std::vector<std::size_t> dilations)
    : input_dim_(input_dim), channels_(channels), kernel_(kernel) {
  Rng rng(seed);
  std::size_t c_in = input_dim;
  for (std::size_t d : dilations) {
    Block blk;
    blk.dilation = d;
    blk.w = glorot(kernel * c_in, channels, rng);
    blk.b = make_tensor({1, channels});
    blk.gamma = make_tensor({1, channels}, std::vector<double>(channels, 1.0));
    blk.beta = make_tensor({1, channels});
    blk.run_mean.assign(channels, 0.0);
    blk.run_var.assign(channels, 1.0);
    params_.push_back(blk.w);
    params_.push_back(blk.b);
    params_.push_back(blk.gamma);
    params_.push_back(blk.beta);
    blocks_.push_back(std::move(blk));
    c_in = channels;
  }
  wo_ = glorot(channels, 2, rng);
  bo_ = make_tensor({1, 2});
  params_.push_back(wo_);
  params_.push_back(bo_);
}

TensorPtr TcnBaseline::forward(const std::vector<const Mat*>& batch, bool training) {
  const std::size_t bsz = batch.size();
  const std::size_t steps = batch.front()->rows;
  for (const Mat* m : batch)
    if (m->cols != input_dim_ || m->rows != steps)
      throw std::invalid_argument("tcn: window shape mismatch");

  std::vector<TensorPtr> seqs(bsz);
  for (std::size_t bi = 0; bi < bsz; ++bi)
    seqs[bi] = make_tensor({steps, input_dim_},
                           std::vector<double>(batch[bi]->v.begin(), batch[bi]->v.end()));

  for (auto& blk : blocks_) {
    std::vector<TensorPtr> conv(bsz);
    for (std::size_t bi = 0; bi < bsz; ++bi)
      conv[bi] = conv1d_causal(seqs[bi], blk.w, blk.b, kernel_, blk.dilation);
    auto stacked = (bsz == 1) ? conv[0] : concat_rows(conv);
    TensorPtr normed;
    if (training) {
      std::vector<double> mu, var;
      normed = batch_norm_train(stacked, blk.gamma, blk.beta, &mu, &var);
      constexpr double kMomentum = 0.1;
      for (std::size_t j = 0; j < channels_; ++j) {
        blk.run_mean[j] = (1.0 - kMomentum) * blk.run_mean[j] + kMomentum * mu[j];
        blk.run_var[j] = (1.0 - kMomentum) * blk.run_var[j] + kMomentum * var[j];
      }
    } else {
      normed = batch_norm_eval(stacked, blk.gamma, blk.beta, blk.run_mean, blk.run_var);
    }
    auto activated = relu(normed);
    for (std::size_t bi = 0; bi < bsz; ++bi)
      seqs[bi] = slice_rows(activated, bi * steps, (bi + 1) * steps);
  }

  std::vector<TensorPtr> lasts(bsz);
  for (std::size_t bi = 0; bi < bsz; ++bi) lasts[bi] = slice_rows(seqs[bi], steps - 1, steps);
  auto h = (bsz == 1) ? lasts[0] : concat_rows(lasts);
  return add_rowvec(matmul(h, wo_), bo_);
}

TrainHistory TcnBaseline::train(const OneStepDataset& data, const BaselineTrainConfig& cfg) {
  auto hist = train_onestep(
      data, cfg, params_,
      [this](const std::vector<const Mat*>& b, bool training) { return forward(b, training); });
  trained_ = true;
  return hist;
}

Vec2 TcnBaseline::predict(const Mat& window) const {
  if (!trained_) throw std::logic_error("tcn: predict before training");
  auto out = const_cast<TcnBaseline*>(this)->forward({&window}, false);
  return {out->data[0], out->data[1]};
}

Mat TcnBaseline::roll_forward(const Mat& window, const Mat& future_features) const {
  return roll_net([this](const Mat& w) { return predict(w); }, window, future_features);
}

std::vector<std::string> TcnBaseline::snapshot_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const std::string base = "block" + std::to_string(l);
    names.push_back(base + ".w");
    names.push_back(base + ".b");
    names.push_back(base + ".gamma");
    names.push_back(base + ".beta");
  }
  names.push_back("wo");
  names.push_back("bo");
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const std::string base = "block" + std::to_string(l);
    names.push_back(base + ".run_mean");
    names.push_back(base + ".run_var");
  }
  return names;
}

std::vector<TensorPtr> TcnBaseline::snapshot_tensors() const {
  std::vector<TensorPtr> out = params_;
  for (const auto& blk : blocks_) {
    out.push_back(make_tensor({1, channels_}, blk.run_mean));
    out.push_back(make_tensor({1, channels_}, blk.run_var));
  }
  return out;
}

void TcnBaseline::restore_snapshot(const std::vector<std::string>& names,
                                   const std::vector<std::vector<double>>& data) {
  const auto expected = snapshot_names();
  if (names != expected) throw std::runtime_error("tcn snapshot: tensor name list mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (data[i].size() != params_[i]->data.size())
      throw std::runtime_error("tcn snapshot: size mismatch for " + names[i]);
    params_[i]->data = data[i];
  }
  std::size_t idx = params_.size();
  for (auto& blk : blocks_) {
    blk.run_mean = data[idx++];
    blk.run_var = data[idx++];
  }
  trained_ = true;
}

}  // namespace driftcast
