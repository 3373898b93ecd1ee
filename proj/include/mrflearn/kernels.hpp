// Dense double-precision kernels used by the eigensolver, the simplex tableau
// and feature accumulation. Each kernel has a scalar reference implementation
// and, on x86-64, an AVX2/FMA variant chosen at first use.
#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace mrflearn::kernels {

struct KernelTable {
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i w[i] * a[i] * b[i]
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // z += alpha * x + beta * y
  void (*axpy2)(double alpha, const double* x, double beta, const double* y, double* z,
                std::size_t n);
  // (x, y) <- (c*x - s*y, s*x + c*y)
  void (*rotate)(double c, double s, double* x, double* y, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
};

enum class Isa { kScalar, kAvx2 };

const KernelTable& scalar_table();
// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

// The table in use. Selected once: AVX2 when available unless the
// MRFLEARN_KERNELS environment variable is set to "scalar".
const KernelTable& active();
// Overrides the selection (tests and benchmarks). Returns false if the
// requested ISA is unavailable, leaving the selection unchanged.
bool select(Isa isa);
std::string_view active_name();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double weighted_dot(std::span<const double> w, std::span<const double> a,
                           std::span<const double> b) {
  return active().weighted_dot(w.data(), a.data(), b.data(), w.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}
inline void axpy2(double alpha, std::span<const double> x, double beta,
                  std::span<const double> y, std::span<double> z) {
  active().axpy2(alpha, x.data(), beta, y.data(), z.data(), z.size());
}
inline void rotate(double c, double s, std::span<double> x, std::span<double> y) {
  active().rotate(c, s, x.data(), y.data(), x.size());
}
inline void scale(double alpha, std::span<double> x) {
  active().scale(alpha, x.data(), x.size());
}

}  // namespace mrflearn::kernels
