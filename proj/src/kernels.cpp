#include "driftcast/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace driftcast::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(const double* a, double s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s * a[i];
}

struct Dispatch {
  Backend backend;
  const detail::KernelTable* table;
};

Dispatch select_initial() {
  if (const char* env = std::getenv("DRIFTCAST_KERNELS")) {
    std::string v(env);
    if (v == "scalar") return {Backend::Scalar, &detail::scalar_table()};
    if (v == "avx2") {
      if (const auto* t = detail::avx2_table()) return {Backend::Avx2, t};
      throw std::runtime_error("DRIFTCAST_KERNELS=avx2 but AVX2 unavailable");
    }
    if (v == "neon") {
      if (const auto* t = detail::neon_table()) return {Backend::Neon, t};
      throw std::runtime_error("DRIFTCAST_KERNELS=neon but NEON unavailable");
    }
    throw std::runtime_error("unknown DRIFTCAST_KERNELS value: " + v);
  }
  if (const auto* t = detail::avx2_table()) return {Backend::Avx2, t};
  if (const auto* t = detail::neon_table()) return {Backend::Neon, t};
  return {Backend::Scalar, &detail::scalar_table()};
}

Dispatch& dispatch() {
  static Dispatch d = select_initial();
  return d;
}

}  // namespace

namespace detail {
const KernelTable& scalar_table() {
  static const KernelTable t{dot_scalar, axpy_scalar, add_scalar,
                             sub_scalar,  mul_scalar,  scale_scalar};
  return t;
}
}  // namespace detail

Backend active_backend() { return dispatch().backend; }

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return detail::avx2_table() != nullptr;
    case Backend::Neon: return detail::neon_table() != nullptr;
  }
  return false;
}

void force_backend(Backend b) {
  switch (b) {
    case Backend::Scalar:
      dispatch() = {Backend::Scalar, &detail::scalar_table()};
      return;
    case Backend::Avx2:
      if (const auto* t = detail::avx2_table()) {
        dispatch() = {Backend::Avx2, t};
        return;
      }
      throw std::runtime_error("AVX2 backend unsupported on this CPU");
    case Backend::Neon:
      if (const auto* t = detail::neon_table()) {
        dispatch() = {Backend::Neon, t};
        return;
      }
      throw std::runtime_error("NEON backend unsupported on this CPU");
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().table->axpy(alpha, x, y, n);
}
void add(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().table->add(a, b, out, n);
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().table->sub(a, b, out, n);
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  dispatch().table->mul(a, b, out, n);
}
void scale(const double* a, double s, double* out, std::size_t n) {
  dispatch().table->scale(a, s, out, n);
}

void matmul_acc(const double* a, const double* b, double* c,
                std::size_t m, std::size_t k, std::size_t n) {
  const auto* t = dispatch().table;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double v = arow[l];
      if (v != 0.0) t->axpy(v, b + l * n, crow, n);
    }
  }
}

void matmul_nt_acc(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
  const auto* t = dispatch().table;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += t->dot(arow, b + j * k, k);
  }
}

void matmul_tn_acc(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
  const auto* t = dispatch().table;
  for (std::size_t l = 0; l < k; ++l) {
    const double* brow = b + l * n;
    const double* arow = a + l * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = arow[i];
      if (v != 0.0) t->axpy(v, brow, c + i * n, n);
    }
  }
}

}  // namespace driftcast::kernels
