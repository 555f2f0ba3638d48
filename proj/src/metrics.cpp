#include "oraclefdr/metrics.hpp"

#include <cmath>

#include "oraclefdr/errors.hpp"

namespace oraclefdr {
namespace {

double ratio_or_zero(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts confusion(const DecisionResult& decision, std::span<const std::uint8_t> theta) {
  if (decision.reject.size() != theta.size()) throw InvalidArgument("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (decision.reject[i]) {
      ++c.R;
      if (!theta[i]) ++c.V;
    } else if (theta[i]) {
      ++c.W;
    }
  }
  c.A = theta.size() - c.R;
  return c;
}

ErrorRates aggregate(std::span<const ConfusionCounts> counts) {
  if (counts.empty()) throw InvalidArgument("aggregate: no replicates");
  const double m = static_cast<double>(counts.size());
  ErrorRates e;
  e.replicates = counts.size();
  std::size_t sum_v = 0, sum_r = 0, sum_w = 0, sum_a = 0;
  double sum_fdp = 0.0, sum_fnp = 0.0;
  for (const auto& c : counts) {
    sum_v += c.V;
    sum_r += c.R;
    sum_w += c.W;
    sum_a += c.A;
    sum_fdp += ratio_or_zero(c.V, c.R);
    sum_fnp += ratio_or_zero(c.W, c.A);
    e.replicates_without_rejections += c.R == 0;
    e.replicates_without_acceptances += c.A == 0;
  }
  e.fdr = sum_fdp / m;
  e.fnr = sum_fnp / m;
  e.mfdr = ratio_or_zero(sum_v, sum_r);
  e.mfnr = ratio_or_zero(sum_w, sum_a);
  e.mean_rejections = static_cast<double>(sum_r) / m;
  if (counts.size() > 1) {
    double ss_fdp = 0.0, ss_fnp = 0.0;
    for (const auto& c : counts) {
      const double a = ratio_or_zero(c.V, c.R) - e.fdr;
      const double b = ratio_or_zero(c.W, c.A) - e.fnr;
      ss_fdp += a * a;
      ss_fnp += b * b;
    }
    e.se_fdr = std::sqrt(ss_fdp / (m - 1.0) / m);
    e.se_fnr = std::sqrt(ss_fnp / (m - 1.0) / m);
  }
  return e;
}

double classification_loss(const DecisionResult& decision, std::span<const std::uint8_t> theta, double lambda) {
  if (decision.reject.size() != theta.size()) throw InvalidArgument("classification_loss: length mismatch");
  if (!(lambda > 0.0)) throw InvalidArgument("classification_loss: lambda must be positive");
  if (theta.empty()) return 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (decision.reject[i] && !theta[i]) loss += 1.0;
    if (!decision.reject[i] && theta[i]) loss += lambda;
  }
  return loss / static_cast<double>(theta.size());
}

}  // namespace oraclefdr
