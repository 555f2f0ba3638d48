#include "oraclefdr/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "oraclefdr/errors.hpp"

namespace oraclefdr {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
}

DecisionResult reject_smallest(std::span<const std::size_t> order, std::size_t count, Method method) {
  DecisionResult d;
  d.method = method;
  d.reject.assign(order.size(), 0);
  for (std::size_t r = 0; r < count; ++r) d.reject[order[r]] = 1;
  d.num_rejected = count;
  d.cutoff_rank = count;
  return d;
}

std::size_t running_average_cutoff(std::span<const double> values, std::span<const std::size_t> order,
                                   double alpha) {
  std::size_t cutoff = 0;
  double sum = 0.0;
  for (std::size_t l = 0; l < order.size(); ++l) {
    sum += values[order[l]];
    if (sum <= alpha * static_cast<double>(l + 1)) cutoff = l + 1;
  }
  return cutoff;
}

void check_step_up_scale(const StatisticVector& t) {
  if (t.scale == StatScale::p_value)
    throw InvalidArgument("step-up rule expects posterior_null or marginal_lfdr statistics");
}

}  // namespace

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::bh: return "bh";
    case Method::marginal: return "marginal";
    case Method::oracle: return "oracle";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  if (name == "bh") return Method::bh;
  if (name == "marginal") return Method::marginal;
  if (name == "oracle") return Method::oracle;
  return std::nullopt;
}

std::vector<std::size_t> ascending_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  return order;
}

std::size_t step_up_threshold(const StatisticVector& t, double alpha) {
  check_alpha(alpha);
  check_step_up_scale(t);
  const auto order = ascending_order(t.values);
  return running_average_cutoff(t.values, order, alpha);
}

DecisionResult oracle_procedure(const StatisticVector& t, double alpha) {
  check_alpha(alpha);
  check_step_up_scale(t);
  const auto order = ascending_order(t.values);
  return reject_smallest(order, running_average_cutoff(t.values, order, alpha), Method::oracle);
}

double normal_upper_tail(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

StatisticVector upper_tail_pvalues(std::span<const double> x) {
  StatisticVector pv{std::vector<double>(x.size()), StatScale::p_value};
  for (std::size_t i = 0; i < x.size(); ++i) pv.values[i] = normal_upper_tail(x[i]);
  return pv;
}

DecisionResult bh_procedure(std::span<const double> x, double alpha) {
  check_alpha(alpha);
  const StatisticVector pv = upper_tail_pvalues(x);
  const auto order = ascending_order(pv.values);
  const double n = static_cast<double>(x.size());
  std::size_t cutoff = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (pv.values[order[i]] <= static_cast<double>(i + 1) * alpha / n) cutoff = i + 1;
  return reject_smallest(order, cutoff, Method::bh);
}

StatisticVector marginal_lfdr(std::span<const double> x, double p, double k) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("marginal_lfdr: p must lie in (0, 1)");
  StatisticVector m{std::vector<double>(x.size()), StatScale::marginal_lfdr};
  const double log_null_prior = std::log1p(-p);
  const double log_alt_prior = std::log(p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double l0 = log_null_prior - 0.5 * x[i] * x[i];
    const double d = x[i] - k;
    const double l1 = log_alt_prior - 0.5 * d * d;
    const double top = std::max(l0, l1);
    const double log_mix = top + std::log(std::exp(l0 - top) + std::exp(l1 - top));
    m.values[i] = std::exp(l0 - log_mix);
  }
  return m;
}

DecisionResult marginal_procedure(std::span<const double> x, double p, double k, double alpha) {
  check_alpha(alpha);
  const StatisticVector m = marginal_lfdr(x, p, k);
  const auto order = ascending_order(m.values);
  return reject_smallest(order, running_average_cutoff(m.values, order, alpha), Method::marginal);
}

}  // namespace oraclefdr
