#pragma once

// Two-group model: theta_i iid Bernoulli(p), X | theta ~ N(k theta, Sigma).

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "oraclefdr/covariance.hpp"

namespace oraclefdr {

struct ModelParams {
  std::size_t n = 0;
  double p = 0.0;      // non-null proportion
  double k = 0.0;      // non-null mean shift
  CovarianceSpec sigma = CovarianceSpec::identity(1);
  double alpha = 0.05;  // target level

  // Throws ConfigError unless 0 < p < 1, k != 0, 0 < alpha < 1 and sigma.n == n.
  void validate() const;
};

struct SampleDraw {
  std::vector<std::uint8_t> theta;  // 1 = non-null
  std::vector<double> x;
};

// Per-replicate random stream.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the standard.
// Uniforms take the top 53 bits of one engine output, giving (0, 1) after a
// half-ulp shift. Normals use the Box-Muller transform, both values of each
// pair consumed in order. Neither step goes through std::*_distribution, whose
// algorithms vary between standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() noexcept;
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Counter-based seed derivation; pure function of its arguments.
struct SeedSpec {
  std::uint64_t base_seed = 0;

  // SplitMix64 finalizer chained over (base, cell, replicate). Distinct
  // (cell, replicate) pairs give distinct seeds for cell, replicate < 2^32.
  std::uint64_t stream_seed(std::uint64_t cell_index, std::uint64_t replicate_index) const noexcept;
};

std::uint64_t splitmix64(std::uint64_t z) noexcept;

std::vector<std::uint8_t> sample_states(std::size_t n, double p, RandomStream& stream);

std::vector<double> sample_observations(std::span<const std::uint8_t> theta, double k,
                                        const CholeskyFactor& factor, RandomStream& stream);

// States first, then observations, from one stream.
SampleDraw sample_draw(const ModelParams& params, const CholeskyFactor& factor, RandomStream& stream);

}  // namespace oraclefdr
