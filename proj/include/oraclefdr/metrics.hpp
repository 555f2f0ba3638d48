#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "oraclefdr/procedures.hpp"

namespace oraclefdr {

struct ConfusionCounts {
  std::size_t V = 0;  // false rejections
  std::size_t R = 0;  // rejections
  std::size_t W = 0;  // false acceptances
  std::size_t A = 0;  // acceptances
};

struct ErrorRates {
  double fdr = 0.0;   // mean of V/R, 0/0 -> 0
  double fnr = 0.0;   // mean of W/A, 0/0 -> 0
  double mfdr = 0.0;  // sum V / sum R
  double mfnr = 0.0;  // sum W / sum A
  double mean_rejections = 0.0;
  double se_fdr = 0.0;  // standard errors of the per-replicate ratios
  double se_fnr = 0.0;
  std::size_t replicates = 0;
  std::size_t replicates_without_rejections = 0;  // R == 0
  std::size_t replicates_without_acceptances = 0;  // A == 0
};

ConfusionCounts confusion(const DecisionResult& decision, std::span<const std::uint8_t> theta);

ErrorRates aggregate(std::span<const ConfusionCounts> counts);

// (1/n) sum [ delta_i (1 - theta_i) + lambda theta_i (1 - delta_i) ]
double classification_loss(const DecisionResult& decision, std::span<const std::uint8_t> theta, double lambda);

}  // namespace oraclefdr
