#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace driftcast {

// Plain row-major matrix for pipeline data (no autodiff).
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  const double* row(std::size_t r) const { return v.data() + r * cols; }
  double* row(std::size_t r) { return v.data() + r * cols; }

  void check(std::size_t r, std::size_t c, const char* what) const {
    if (rows != r || cols != c) throw std::invalid_argument(std::string("shape mismatch: ") + what);
  }
};

}  // namespace driftcast
