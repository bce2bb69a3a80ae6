#pragma once

// Data-parallel inner loops used by the tensor engine. Every kernel has a
// scalar reference implementation plus SIMD variants (AVX2 on x86-64, NEON on
// aarch64) selected once at startup. The DRIFTCAST_KERNELS environment
// variable ("scalar", "avx2", "neon") overrides auto-detection, which the
// equivalence tests use to compare backends.

#include <cstddef>
#include <string>

namespace driftcast::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Backend currently dispatched to.
Backend active_backend();
std::string backend_name(Backend b);

// Force a specific backend. Throws std::runtime_error if unsupported on this
// CPU. Intended for tests and benchmarking.
void force_backend(Backend b);

bool backend_supported(Backend b);

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);

// out = s * a
void scale(const double* a, double s, double* out, std::size_t n);

// C(MxN) += A(MxK) * B(KxN), all row-major.
void matmul_acc(const double* a, const double* b, double* c,
                std::size_t m, std::size_t k, std::size_t n);

// C(MxN) += A(MxK) * B(NxK)^T, i.e. C[i][j] = dot(A.row(i), B.row(j)).
void matmul_nt_acc(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);

// C(MxN) += A(KxM)^T * B(KxN).
void matmul_tn_acc(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);

namespace detail {
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(const double*, double, double*, std::size_t);
};
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not built/supported
const KernelTable* neon_table();
}  // namespace detail

}  // namespace driftcast::kernels
