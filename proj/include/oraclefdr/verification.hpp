#pragma once

// Randomized comparison of the closed-form statistic against exhaustive
// enumeration. Shared by the `verify` subcommand, the unit tests and the
// acceptance suite.

#include <cstdint>
#include <vector>

#include "oraclefdr/model.hpp"

namespace oraclefdr {

// Random PD correlation matrix: B B^T + D with B n x r Gaussian (r uniform in
// 1..n) and D a positive diagonal, rescaled to unit diagonal. Off-diagonal
// signs are mixed.
DenseMatrix random_correlation(std::size_t n, RandomStream& stream);

struct EquivalenceCase {
  DenseMatrix sigma;
  std::vector<double> x;
  double k;
  double p;
};

// Instance i: n = 1 + i % max_n, p cycles {0.05, 0.3, 0.7}, k cycles
// {-1.5, 2.5}, x drawn from the model for that Sigma.
EquivalenceCase equivalence_case(std::size_t index, std::uint64_t seed, std::size_t max_n = 10);

inline double relative_error(double observed, double reference) noexcept {
  return std::abs(observed - reference) / std::abs(reference);
}

struct EquivalenceReport {
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  std::size_t worst_instance = 0;
  std::size_t worst_n = 0;
  std::size_t failing_instances = 0;  // any coordinate above tolerance
  double tolerance = 0.0;
  bool passed() const noexcept { return failing_instances == 0; }
};

EquivalenceReport run_equivalence_suite(std::size_t instances, std::uint64_t seed, double tolerance = 1e-10,
                                        std::size_t max_n = 10);

}  // namespace oraclefdr
