#include "oraclefdr/verification.hpp"

#include <array>
#include <cmath>

#include "oraclefdr/oracle.hpp"

namespace oraclefdr {

DenseMatrix random_correlation(std::size_t n, RandomStream& stream) {
  const std::size_t rank = 1 + static_cast<std::size_t>(stream.uniform() * static_cast<double>(n));
  std::vector<double> b(n * rank);
  stream.fill_normal(b);
  DenseMatrix s(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < rank; ++c) v += b[i * rank + c] * b[j * rank + c];
      s(i, j) = v;
      s(j, i) = v;
    }
    s(i, i) += 0.05 + stream.uniform();
  }
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) scale[i] = 1.0 / std::sqrt(s(i, i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double v = s(i, j) * scale[i] * scale[j];
      s(i, j) = v;
      s(j, i) = v;
    }
    s(i, i) = 1.0;
  }
  return s;
}

EquivalenceCase equivalence_case(std::size_t index, std::uint64_t seed, std::size_t max_n) {
  static constexpr std::array<double, 3> kProportions{0.05, 0.3, 0.7};
  static constexpr std::array<double, 2> kShifts{-1.5, 2.5};
  const std::size_t n = 1 + index % max_n;
  RandomStream stream(SeedSpec{seed}.stream_seed(0, index));
  EquivalenceCase c{random_correlation(n, stream), {}, kShifts[index % kShifts.size()],
                    kProportions[index % kProportions.size()]};
  const CovarianceSpec spec = CovarianceSpec::dense(c.sigma);
  const auto theta = sample_states(n, c.p, stream);
  c.x = sample_observations(theta, c.k, cholesky(spec), stream);
  return c;
}

EquivalenceReport run_equivalence_suite(std::size_t instances, std::uint64_t seed, double tolerance,
                                        std::size_t max_n) {
  EquivalenceReport report;
  report.instances = instances;
  report.tolerance = tolerance;
  for (std::size_t i = 0; i < instances; ++i) {
    const EquivalenceCase c = equivalence_case(i, seed, max_n);
    const OracleContext ctx = build_context(precision(CovarianceSpec::dense(c.sigma)), c.k, c.p);
    const StatisticVector closed = oracle_statistics(c.x, ctx);
    const StatisticVector exact = brute_force_posterior(c.x, c.sigma, c.k, c.p);
    bool failing = false;
    for (std::size_t j = 0; j < closed.size(); ++j) {
      const double err = relative_error(closed.values[j], exact.values[j]);
      if (!(err <= tolerance)) failing = true;
      if (err > report.max_rel_error || std::isnan(err)) {
        report.max_rel_error = err;
        report.worst_instance = i;
        report.worst_n = c.sigma.size();
      }
    }
    report.failing_instances += failing;
  }
  return report;
}

}  // namespace oraclefdr
