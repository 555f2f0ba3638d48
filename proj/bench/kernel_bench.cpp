// Serial vs OpenMP timings for the dense kernels, plus one end-to-end oracle
// evaluation on the structured fast path at n = 5000.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <omp.h>

#include "oraclefdr/kernels.hpp"
#include "oraclefdr/oracle.hpp"
#include "oraclefdr/verification.hpp"

using namespace oraclefdr;

namespace {

template <class F>
double seconds(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1500;
  std::printf("threads=%d n=%zu\n", omp_get_max_threads(), n);

  RandomStream stream(42);
  const CovarianceSpec spec = CovarianceSpec::dense(random_correlation(n, stream));
  const DenseMatrix t = precision(spec).to_dense();
  DenseMatrix lower(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) lower(i, j) = t(i, j);
  std::vector<double> x(n), y(n), s(n);
  stream.fill_normal(x);

  auto row = [](const char* name, double ser, double par) {
    std::printf("%-24s serial %10.3f ms   parallel %10.3f ms   speedup %5.2fx\n", name, ser * 1e3, par * 1e3,
                ser / par);
  };
  row("matvec", seconds([&] { kernels::serial::matvec(t, x, y); }, 20),
      seconds([&] { kernels::parallel::matvec(t, x, y); }, 20));
  row("lower_matvec", seconds([&] { kernels::serial::lower_matvec(lower, x, y); }, 20),
      seconds([&] { kernels::parallel::lower_matvec(lower, x, y); }, 20));
  row("column_logterm_sums", seconds([&] { kernels::serial::column_logterm_sums(t, 2.5, 0.05, s); }, 3),
      seconds([&] { kernels::parallel::column_logterm_sums(t, 2.5, 0.05, s); }, 3));
  DenseMatrix chol = build_covariance(spec);
  kernels::cholesky_in_place(chol);
  row("inverse_from_cholesky", seconds([&] { (void)kernels::serial::inverse_from_cholesky(chol); }, 1),
      seconds([&] { (void)kernels::parallel::inverse_from_cholesky(chol); }, 1));

  const OracleContext equi = build_context(precision(CovarianceSpec::equicorrelated(5000, 0.5)), 2.5, 0.05);
  std::vector<double> xe(5000);
  stream.fill_normal(xe);
  const double te = seconds([&] { (void)oracle_statistics(xe, equi); }, 200);
  std::printf("%-24s %10.3f ms per evaluation (n = 5000)\n", "oracle equicorrelated", te * 1e3);
  return 0;
}
