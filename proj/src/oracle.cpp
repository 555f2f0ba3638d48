#include "oraclefdr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oraclefdr/errors.hpp"
#include "oraclefdr/kernels.hpp"

namespace oraclefdr {

const char* to_string(StatScale scale) noexcept {
  switch (scale) {
    case StatScale::posterior_null: return "posterior_null";
    case StatScale::p_value: return "p_value";
    case StatScale::marginal_lfdr: return "marginal_lfdr";
  }
  return "?";
}

bool StatisticVector::valid() const noexcept {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

OracleContext::OracleContext(PrecisionMatrix precision, double k, double p)
    : precision_(std::move(precision)), k_(k), p_(p), log_prior_odds_(std::log(p) - std::log1p(-p)) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("OracleContext: p must lie in (0, 1)");
  if (!(k != 0.0) || !std::isfinite(k)) throw InvalidArgument("OracleContext: k must be finite and nonzero");
  column_sums_.resize(precision_.n());
  precision_.column_logterm_sums(k, p, column_sums_);
  for (double s : column_sums_)
    if (!std::isfinite(s)) throw NumericalError("oracle context: non-finite column log-term sum");
}

OracleContext build_context(PrecisionMatrix precision, double k, double p) {
  return OracleContext(std::move(precision), k, p);
}

std::vector<double> log_u(std::span<const double> x, const OracleContext& ctx) {
  const std::size_t n = ctx.n();
  if (x.size() != n) throw InvalidArgument("log_u: dimension mismatch");
  std::vector<double> s(n);
  ctx.precision().multiply(x, s);
  const double k = ctx.k();
  const double half_k2 = 0.5 * k * k;
  const auto diag = ctx.precision().diag();
  const auto sums = ctx.column_logterm_sums();
  for (std::size_t i = 0; i < n; ++i) s[i] = k * s[i] - half_k2 * diag[i] + sums[i];
  return s;
}

StatisticVector oracle_statistics(std::span<const double> x, const OracleContext& ctx) {
  StatisticVector out{log_u(x, ctx), StatScale::posterior_null};
  const double lpo = ctx.log_prior_odds();
  for (double& v : out.values) {
    v = logistic_complement(lpo + v);
    if (std::isnan(v)) throw NumericalError("oracle statistic is NaN");
  }
  return out;
}

std::vector<double> bayes_lambda(const StatisticVector& t) {
  std::vector<double> lambda(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = t.values[i];
    lambda[i] = v >= 1.0 ? std::numeric_limits<double>::infinity() : v / (1.0 - v);
  }
  return lambda;
}

StatisticVector brute_force_posterior(std::span<const double> x, const DenseMatrix& sigma, double k, double p) {
  const std::size_t n = sigma.size();
  if (x.size() != n) throw InvalidArgument("brute_force_posterior: dimension mismatch");
  if (n == 0 || n > kMaxEnumerationSize)
    throw InvalidArgument("brute_force_posterior: n must be in [1, " + std::to_string(kMaxEnumerationSize) + "]");
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("brute_force_posterior: p must lie in (0, 1)");

  DenseMatrix lower = sigma;
  if (kernels::cholesky_in_place(lower) != 0) throw NumericalError("brute_force_posterior: sigma is not PD");

  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const std::size_t states = std::size_t{1} << n;
  std::vector<double> log_w(states);
  std::vector<double> resid(n), y(n);
  // The Gaussian normalizing constant is common to every state and cancels.
  for (std::size_t mask = 0; mask < states; ++mask) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool on = (mask >> i) & 1U;
      ones += on;
      resid[i] = x[i] - (on ? k : 0.0);
    }
    double quad = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double s = resid[r];
      for (std::size_t c = 0; c < r; ++c) s -= lower(r, c) * y[c];
      y[r] = s / lower(r, r);
      quad += y[r] * y[r];
    }
    log_w[mask] = static_cast<double>(ones) * log_p + static_cast<double>(n - ones) * log_q - 0.5 * quad;
  }

  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  std::vector<double> null_mass(n, 0.0);
  for (std::size_t mask = 0; mask < states; ++mask) {
    const double w = std::exp(log_w[mask] - top);
    total += w;
    for (std::size_t i = 0; i < n; ++i)
      if (!((mask >> i) & 1U)) null_mass[i] += w;
  }
  StatisticVector out{std::move(null_mass), StatScale::posterior_null};
  for (double& v : out.values) v /= total;
  return out;
}

}  // namespace oraclefdr
