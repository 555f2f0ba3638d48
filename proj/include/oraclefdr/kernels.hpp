#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::parallel with the same
// signature; tests check they agree and bench/ compares their speed.
//
// The parallel versions assign each output element to exactly one thread and
// accumulate in the same order as the serial loop, so results are bitwise
// identical regardless of the thread count.

#include <cmath>
#include <cstddef>
#include <span>

#include "oraclefdr/matrix.hpp"

namespace oraclefdr::kernels {

// ln(p * exp(-k2t) + (1 - p)) without overflow for large |k2t|.
inline double log_mixture_term(double k2t, double p) noexcept {
  const double a = -k2t;
  if (a > 0.0) return a + std::log(p + (1.0 - p) * std::exp(-a));
  return std::log1p(p * std::expm1(a));
}

namespace serial {

// y = A x
void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y);

// y = L z for lower-triangular L (upper triangle ignored).
void lower_matvec(const DenseMatrix& lower, std::span<const double> z, std::span<double> y);

// out_i = sum_{j != i} log_mixture_term(k^2 t_{j,i}, p)
void column_logterm_sums(const DenseMatrix& t, double k, double p, std::span<double> out);

// Inverse from a lower Cholesky factor: two triangular solves per column.
DenseMatrix inverse_from_cholesky(const DenseMatrix& lower);

}  // namespace serial

namespace parallel {

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y);
void lower_matvec(const DenseMatrix& lower, std::span<const double> z, std::span<double> y);
void column_logterm_sums(const DenseMatrix& t, double k, double p, std::span<double> out);
DenseMatrix inverse_from_cholesky(const DenseMatrix& lower);

}  // namespace parallel

// In-place lower Cholesky. Returns 0 on success, otherwise the 1-based index
// of the first leading minor that is not positive definite. The strict upper
// triangle is zeroed on success.
std::size_t cholesky_in_place(DenseMatrix& a);

}  // namespace oraclefdr::kernels
