#include "oraclefdr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oraclefdr/errors.hpp"

namespace oraclefdr::kernels {
namespace {

void check_vec(const DenseMatrix& a, std::span<const double> x, std::span<double> y,
               const char* what) {
  if (x.size() != a.size() || y.size() != a.size())
    throw InvalidArgument(std::string(what) + ": dimension mismatch");
}

// Column i of the inverse: solve L w = e_i, then L^T v = w.
void inverse_column(const DenseMatrix& lower, std::size_t col, std::span<double> w,
                    std::span<double> v) {
  const std::size_t n = lower.size();
  std::fill(w.begin(), w.end(), 0.0);
  for (std::size_t r = col; r < n; ++r) {
    double s = (r == col) ? 1.0 : 0.0;
    for (std::size_t c = col; c < r; ++c) s -= lower(r, c) * w[c];
    w[r] = s / lower(r, r);
  }
  for (std::size_t r = n; r-- > 0;) {
    double s = w[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= lower(c, r) * v[c];
    v[r] = s / lower(r, r);
  }
}

constexpr std::size_t kColumnBlock = 64;

}  // namespace

namespace serial {

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
  check_vec(a, x, y, "matvec");
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void lower_matvec(const DenseMatrix& lower, std::span<const double> z, std::span<double> y) {
  check_vec(lower, z, y, "lower_matvec");
  const std::size_t n = lower.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = lower.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += row[j] * z[j];
    y[i] = s;
  }
}

void column_logterm_sums(const DenseMatrix& t, double k, double p, std::span<double> out) {
  const std::size_t n = t.size();
  if (out.size() != n) throw InvalidArgument("column_logterm_sums: dimension mismatch");
  const double k2 = k * k;
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = t.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      out[i] += log_mixture_term(k2 * row[i], p);
    }
  }
}

DenseMatrix inverse_from_cholesky(const DenseMatrix& lower) {
  const std::size_t n = lower.size();
  DenseMatrix inv(n);
  std::vector<double> w(n), v(n);
  for (std::size_t col = 0; col < n; ++col) {
    inverse_column(lower, col, w, v);
    for (std::size_t r = 0; r < n; ++r) inv(r, col) = v[r];
  }
  return inv;
}

}  // namespace serial

namespace parallel {

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
  check_vec(a, x, y, "matvec");
  const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = a.row(static_cast<std::size_t>(i));
    double s = 0.0;
    for (std::ptrdiff_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void lower_matvec(const DenseMatrix& lower, std::span<const double> z, std::span<double> y) {
  check_vec(lower, z, y, "lower_matvec");
  const auto n = static_cast<std::ptrdiff_t>(lower.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = lower.row(static_cast<std::size_t>(i));
    double s = 0.0;
    for (std::ptrdiff_t j = 0; j <= i; ++j) s += row[j] * z[j];
    y[i] = s;
  }
}

void column_logterm_sums(const DenseMatrix& t, double k, double p, std::span<double> out) {
  const std::size_t n = t.size();
  if (out.size() != n) throw InvalidArgument("column_logterm_sums: dimension mismatch");
  const double k2 = k * k;
  const auto blocks = static_cast<std::ptrdiff_t>((n + kColumnBlock - 1) / kColumnBlock);
  // Each thread owns a block of output columns and walks rows in order, so the
  // per-column accumulation order matches the serial kernel.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kColumnBlock;
    const std::size_t hi = std::min(n, lo + kColumnBlock);
    for (std::size_t i = lo; i < hi; ++i) out[i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto row = t.row(j);
      for (std::size_t i = lo; i < hi; ++i) {
        if (i == j) continue;
        out[i] += log_mixture_term(k2 * row[i], p);
      }
    }
  }
}

DenseMatrix inverse_from_cholesky(const DenseMatrix& lower) {
  const std::size_t n = lower.size();
  DenseMatrix inv(n);
  const auto cols = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> w(n), v(n);
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t col = 0; col < cols; ++col) {
      inverse_column(lower, static_cast<std::size_t>(col), w, v);
      for (std::size_t r = 0; r < n; ++r) inv(r, static_cast<std::size_t>(col)) = v[r];
    }
  }
  return inv;
}

}  // namespace parallel

std::size_t cholesky_in_place(DenseMatrix& a) {
  const std::size_t n = a.size();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t c = 0; c < j; ++c) d -= a(j, c) * a(j, c);
    if (!(d > 0.0) || !std::isfinite(d)) return j + 1;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (std::size_t r = j + 1; r < n; ++r) {
      double s = a(r, j);
      const auto rr = a.row(r);
      const auto rj = a.row(j);
      for (std::size_t c = 0; c < j; ++c) s -= rr[c] * rj[c];
      a(r, j) = s / ljj;
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) a(r, c) = 0.0;
  return 0;
}

}  // namespace oraclefdr::kernels
