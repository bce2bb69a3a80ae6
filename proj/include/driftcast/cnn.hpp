#pragma once

// Lightweight CNN regressing (C_D, C_L) from grayscale silhouettes, with a
// synthetic shape generator and an analytic label proxy standing in for CFD
// ground truth.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "driftcast/mat.hpp"
#include "driftcast/tensor.hpp"
#include "driftcast/training.hpp"

namespace driftcast {

struct GeometryImage {
  std::string name;
  Mat pixels;  // H x W, values in [0,1]
  bool labeled = false;
  double cd = 0.0;
  double cl = 0.0;
};

enum class ShapeFamily { Ellipse, HalfCircle, Rhombus, Rectangle, Square, Triangle };

extern const std::array<ShapeFamily, 6> kShapeFamilies;
const char* shape_family_name(ShapeFamily f);

// Rasterizes a filled shape (scale relative to the image half-extent, angle
// in radians) and attaches the analytic proxy label:
//   C_D = 1.5 * (cross-flow extent / characteristic length)
//   C_L = 1.0 * (weighted least-squares slope of the per-column midline)
// Flow is along +x, so any shape with a symmetry axis aligned to the flow
// gets C_L = 0.
GeometryImage synth_geometry(ShapeFamily family, double scale, double angle, std::size_t size);

// Deterministic corpus of 179 labeled images over the six families.
std::vector<GeometryImage> default_corpus(std::size_t size = 32);

// --- convolution ops (exposed for gradient tests) ---

// x: {c_in, h*w}; w: {c_out, c_in*k*k}; bias: {1, c_out}. Valid padding.
TensorPtr conv2d_valid(const TensorPtr& x, std::size_t h, std::size_t w_px, const TensorPtr& w,
                       std::size_t kernel, const TensorPtr& bias);
// 2x2 max pooling with stride 2 (odd trailing row/col dropped); gradient
// routed to the argmax positions only.
TensorPtr maxpool2x2(const TensorPtr& x, std::size_t h, std::size_t w_px);

struct CnnConfig {
  std::size_t image_size = 32;
  std::vector<std::size_t> channels = {64, 32, 32};
  std::vector<std::size_t> kernels = {5, 3, 3};
  std::size_t dense_units = 32;
  std::uint64_t seed = 1;
};

class CnnModel {
 public:
  explicit CnnModel(const CnnConfig& cfg);

  TrainHistory train(const std::vector<GeometryImage>& images, const TrainConfig& cfg);
  std::array<double, 2> predict(const GeometryImage& image) const;
  // Clamped at zero for catalog use (coefficients are non-negative).
  std::array<double, 2> predict_coeffs(const GeometryImage& image) const;

  // Flattened feature length after the conv stack (shape arithmetic check).
  std::size_t flatten_length() const { return flatten_len_; }

  TensorPtr forward(const GeometryImage& image) const;
  TensorPtr batch_loss(const std::vector<const GeometryImage*>& batch) const;

  const CnnConfig& config() const { return cfg_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::vector<TensorPtr>& params() { return params_; }
  const std::vector<TensorPtr>& params() const { return params_; }
  std::vector<std::string> param_names() const;

 private:
  CnnConfig cfg_;
  std::vector<TensorPtr> conv_w_, conv_b_;
  TensorPtr dense_w_, dense_b_, out_w_, out_b_;
  std::size_t flatten_len_ = 0;
  std::vector<TensorPtr> params_;
  bool trained_ = false;
};

// --- corpus I/O ---

void write_pgm(const GeometryImage& image, const std::string& path);
GeometryImage read_pgm(const std::string& path);
void save_labels_csv(const std::vector<GeometryImage>& images, const std::string& path);
// Loads images named in the CSV from the given directory (PGM).
std::vector<GeometryImage> load_labeled_corpus(const std::string& dir, const std::string& csv);

}  // namespace driftcast
