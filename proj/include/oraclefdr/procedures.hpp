#pragma once

// Rejection rules: the running-average step-up rule applied to posterior-null
// statistics (oracle) or marginal local FDRs (marginal), and Benjamini-Hochberg
// on one-sided normal p-values.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "oraclefdr/oracle.hpp"

namespace oraclefdr {

enum class Method { bh, marginal, oracle };

const char* to_string(Method m) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;

struct DecisionResult {
  std::vector<std::uint8_t> reject;  // 1 = reject H0_i
  std::size_t num_rejected = 0;
  std::size_t cutoff_rank = 0;  // 0 when nothing is rejected
  Method method = Method::oracle;
};

// Indices sorted by (value, index) ascending.
std::vector<std::size_t> ascending_order(std::span<const double> values);

// k = max{ l : sum_{i <= l} T_(i) <= l * alpha }, or 0.
// Accepts posterior_null and marginal_lfdr scales only.
std::size_t step_up_threshold(const StatisticVector& t, double alpha);

DecisionResult oracle_procedure(const StatisticVector& t, double alpha);

// Upper-tail standard normal probability 1 - Phi(x), via std::erfc (relative
// error near machine epsilon across the whole range, so no cancellation for
// large x).
double normal_upper_tail(double x) noexcept;

StatisticVector upper_tail_pvalues(std::span<const double> x);

// Rejects the l* smallest p-values, l* = max{ i : p_(i) <= i alpha / n }.
DecisionResult bh_procedure(std::span<const double> x, double alpha);

// m_i = (1-p) phi(x_i) / ((1-p) phi(x_i) + p phi(x_i - k)), evaluated from
// the two log-densities.
StatisticVector marginal_lfdr(std::span<const double> x, double p, double k);

DecisionResult marginal_procedure(std::span<const double> x, double p, double k, double alpha);

}  // namespace oraclefdr
