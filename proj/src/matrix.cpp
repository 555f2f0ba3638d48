#include "oraclefdr/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "oraclefdr/errors.hpp"

namespace oraclefdr {

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.size() != b.size()) throw InvalidArgument("multiply: dimension mismatch");
  const std::size_t n = a.size();
  DenseMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < n; ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += ail * b(l, j);
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) t(j, i) = a(i, j);
  return t;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.size() != b.size()) throw InvalidArgument("max_abs_diff: dimension mismatch");
  double m = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

}  // namespace oraclefdr
