#pragma once

// Closed-form posterior-null statistic for the multivariate normal two-group
// model, and an exhaustive-enumeration posterior used to check it.
//
//   T_i = 1 / (1 + p U_i / (1 - p))
//   ln U_i = k (Sigma^{-1} x)_i - k^2 t_ii / 2 + sum_{j != i} ln(p e^{-k^2 t_ji} + 1 - p)
//
// Everything is evaluated in log space; the product over j under- or
// overflows long before n = 5000.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "oraclefdr/covariance.hpp"

namespace oraclefdr {

enum class StatScale { posterior_null, p_value, marginal_lfdr };

const char* to_string(StatScale scale) noexcept;

// Per-hypothesis scores; smaller is more significant.
struct StatisticVector {
  std::vector<double> values;
  StatScale scale = StatScale::posterior_null;

  std::size_t size() const noexcept { return values.size(); }
  // Every entry finite and in [0, 1]. Posterior values may saturate to 0 or 1
  // in floating point; they are never clipped.
  bool valid() const noexcept;
};

class OracleContext {
 public:
  OracleContext(PrecisionMatrix precision, double k, double p);

  std::size_t n() const noexcept { return precision_.n(); }
  const PrecisionMatrix& precision() const noexcept { return precision_; }
  double k() const noexcept { return k_; }
  double p() const noexcept { return p_; }
  double log_prior_odds() const noexcept { return log_prior_odds_; }
  std::span<const double> column_logterm_sums() const noexcept { return column_sums_; }

 private:
  PrecisionMatrix precision_;
  double k_;
  double p_;
  double log_prior_odds_;
  std::vector<double> column_sums_;
};

// One O(n^2) sweep for dense precision, O(1) per block otherwise.
OracleContext build_context(PrecisionMatrix precision, double k, double p);

std::vector<double> log_u(std::span<const double> x, const OracleContext& ctx);

StatisticVector oracle_statistics(std::span<const double> x, const OracleContext& ctx);

// Lambda_i = T_i / (1 - T_i); +inf where T has saturated to 1.
std::vector<double> bayes_lambda(const StatisticVector& t);

// Largest n accepted by brute_force_posterior.
inline constexpr std::size_t kMaxEnumerationSize = 20;

// P(theta_i = 0 | x) by summing the N(k theta, Sigma) density over all 2^n
// state vectors with their Bernoulli prior weights (log-sum-exp throughout).
// Works from a Cholesky factor of sigma, never its inverse.
StatisticVector brute_force_posterior(std::span<const double> x, const DenseMatrix& sigma, double k, double p);

// Numerically stable 1 / (1 + e^z).
inline double logistic_complement(double z) noexcept {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace oraclefdr
