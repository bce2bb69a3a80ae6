#pragma once

// Comparison models: integral-form curve fit, persistence, and the RNN / TCN
// one-step learners, plus shared training plumbing.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "driftcast/mat.hpp"
#include "driftcast/physics.hpp"
#include "driftcast/simulator.hpp"
#include "driftcast/tensor.hpp"
#include "driftcast/training.hpp"

namespace driftcast {

// ---- curve fit: d_j(t) = c1_j * int v_w dτ + c2_j * int v_a dτ + c3_j * t ----

struct CurveFitCoeffs {
  std::array<double, 3> cx{0.0, 0.0, 0.0};
  std::array<double, 3> cy{0.0, 0.0, 0.0};
  double condition = 0.0;  // diag-ratio estimate from the QR factor
};

// Cumulative trapezoidal integral; out[0] = 0.
std::vector<double> cumtrapz(const std::vector<double>& t, const std::vector<double>& v);

CurveFitCoeffs curvefit_fit(const std::vector<double>& t, const std::vector<Vec2>& v_w,
                            const std::vector<Vec2>& v_a, const std::vector<Vec2>& d);
CurveFitCoeffs curvefit_fit(const DriftSeries& series);

std::vector<Vec2> curvefit_predict(const CurveFitCoeffs& coeffs, const std::vector<double>& t,
                                   const std::vector<Vec2>& v_w, const std::vector<Vec2>& v_a);
std::vector<Vec2> curvefit_predict(const CurveFitCoeffs& coeffs, const DriftSeries& series);

// Dense least squares via Householder QR. Throws (with the condition
// estimate) when the design is effectively rank deficient.
std::vector<double> solve_least_squares(const Mat& a, const std::vector<double>& b,
                                        double* condition = nullptr);

// ---- persistence: repeat the last observed position delta ----

Mat persistence_forecast(const Vec2& last_pos, const Vec2& prev_pos, std::size_t steps);

// ---- one-step neural baselines ----

struct OneStepDataset {
  std::vector<Mat> windows;   // each l_e x (features + 2) rows
  std::vector<Vec2> targets;  // next position
};

// Window rows are [features ‖ position]; target is the position one step on.
OneStepDataset make_onestep_windows(const Mat& features, const Mat& positions, std::size_t l_e);

using BaselineTrainConfig = TrainConfig;

class RnnBaseline {
 public:
  RnnBaseline(std::size_t input_dim, std::uint64_t seed, std::size_t units1 = 128,
              std::size_t units2 = 64);

  TrainHistory train(const OneStepDataset& data, const BaselineTrainConfig& cfg);
  Vec2 predict(const Mat& window) const;
  // Recursive multi-horizon rollout: feeds each prediction back as the
  // position column of the next window row (future feature rows supplied).
  Mat roll_forward(const Mat& window, const Mat& future_features) const;

  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::vector<TensorPtr>& params() { return params_; }
  std::vector<std::string> param_names() const;

 private:
  TensorPtr forward(const std::vector<const Mat*>& batch) const;

  std::size_t input_dim_, units1_, units2_;
  TensorPtr w1_, u1_, b1_, w2_, u2_, b2_, wo_, bo_;
  std::vector<TensorPtr> params_;
  bool trained_ = false;
};

// Dilated causal temporal conv net: three conv blocks (kernel 11, dilations
// 32/16/8) with batch norm and ReLU, read out at the last timestep.
class TcnBaseline {
 public:
  TcnBaseline(std::size_t input_dim, std::uint64_t seed, std::size_t channels = 32,
              std::size_t kernel = 11, std::vector<std::size_t> dilations = {32, 16, 8});

  TrainHistory train(const OneStepDataset& data, const BaselineTrainConfig& cfg);
  Vec2 predict(const Mat& window) const;
  Mat roll_forward(const Mat& window, const Mat& future_features) const;

  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::vector<TensorPtr>& params() { return params_; }

  // Snapshot view: parameters plus the batch-norm running statistics.
  std::vector<std::string> snapshot_names() const;
  std::vector<TensorPtr> snapshot_tensors() const;
  void restore_snapshot(const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& data);

 private:
  struct Block {
    TensorPtr w, b;            // conv kernel (kernel*c_in) x c_out and bias
    TensorPtr gamma, beta;     // batch norm affine
    std::vector<double> run_mean, run_var;  // inference statistics
    std::size_t dilation = 1;
  };

  TensorPtr forward(const std::vector<const Mat*>& batch, bool training);

  std::size_t input_dim_, channels_, kernel_;
  std::vector<Block> blocks_;
  TensorPtr wo_, bo_;
  std::vector<TensorPtr> params_;
  bool trained_ = false;
};

// Causal dilated 1-D convolution over a T x c_in sequence. Weight layout:
// (kernel * c_in) x c_out, tap k spanning rows [k*c_in, (k+1)*c_in); tap k
// reads the input dilation*k steps back (zero-padded past the start).
TensorPtr conv1d_causal(const TensorPtr& x, const TensorPtr& w, const TensorPtr& bias,
                        std::size_t kernel, std::size_t dilation);

// Batch normalization over rows (per-column statistics, biased variance).
// Training mode; returns the batch statistics so callers can track running
// averages for inference.
TensorPtr batch_norm_train(const TensorPtr& x, const TensorPtr& gamma, const TensorPtr& beta,
                           std::vector<double>* batch_mean = nullptr,
                           std::vector<double>* batch_var = nullptr, double eps = 1e-5);
TensorPtr batch_norm_eval(const TensorPtr& x, const TensorPtr& gamma, const TensorPtr& beta,
                          const std::vector<double>& mean, const std::vector<double>& var,
                          double eps = 1e-5);

}  // namespace driftcast
