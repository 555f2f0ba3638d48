#include "oraclefdr/model.hpp"

#include <cmath>
#include <numbers>

#include "oraclefdr/errors.hpp"

namespace oraclefdr {

void ModelParams::validate() const {
  if (n == 0) throw ConfigError("n must be positive");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("p must lie in (0, 1)");
  if (!(k != 0.0) || !std::isfinite(k)) throw ConfigError("k must be finite and nonzero");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (sigma.n() != n)
    throw ConfigError("covariance dimension " + std::to_string(sigma.n()) + " does not match n = " +
                      std::to_string(n));
}

double RandomStream::uniform() noexcept {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

void RandomStream::fill_normal(std::span<double> out) noexcept {
  for (double& v : out) v = normal();
}

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SeedSpec::stream_seed(std::uint64_t cell_index, std::uint64_t replicate_index) const noexcept {
  // The counter packs (cell, replicate) injectively below 2^32 each; the
  // finalizer is a bijection, so distinct counters give distinct seeds.
  const std::uint64_t counter = (cell_index << 32) ^ (replicate_index & 0xffffffffULL);
  return splitmix64(splitmix64(base_seed) ^ counter);
}

std::vector<std::uint8_t> sample_states(std::size_t n, double p, RandomStream& stream) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("sample_states: p must lie in (0, 1)");
  std::vector<std::uint8_t> theta(n);
  for (auto& t : theta) t = stream.uniform() < p ? 1 : 0;
  return theta;
}

std::vector<double> sample_observations(std::span<const std::uint8_t> theta, double k,
                                        const CholeskyFactor& factor, RandomStream& stream) {
  if (theta.size() != factor.n()) throw InvalidArgument("sample_observations: dimension mismatch");
  std::vector<double> normals(factor.num_normals());
  stream.fill_normal(normals);
  std::vector<double> x(factor.n());
  factor.apply(normals, x);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (theta[i]) x[i] += k;
  return x;
}

SampleDraw sample_draw(const ModelParams& params, const CholeskyFactor& factor, RandomStream& stream) {
  SampleDraw d;
  d.theta = sample_states(params.n, params.p, stream);
  d.x = sample_observations(d.theta, params.k, factor, stream);
  return d;
}

}  // namespace oraclefdr
