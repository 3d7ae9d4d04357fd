#ifndef CAPM_RNG_HPP
#define CAPM_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace capm {

/// Seedable generator state. Single-owner; concurrent work must use
/// independently derived states.
class RngState {
 public:
  explicit RngState(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  /// A statistically independent state keyed by (seed, salt). Derivation is
  /// order-free: it depends only on the original seed, not on draws made.
  RngState derive(std::uint64_t salt) const;

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& gen() { return gen_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

/// One draw from N(mean, variance). Second parameter is a variance.
double sample_normal(RngState& rng, double mean, double variance);

/// One draw with density proportional to x^{-(shape+1)} exp(-scale/x),
/// i.e. the reciprocal of a Gamma(shape, rate=scale) draw.
double sample_inverse_gamma(RngState& rng, double shape, double scale);

/// Index j with probability exp(lw_j - logsumexp(lw)).
int sample_categorical(RngState& rng, const std::vector<double>& log_weights);

}  // namespace capm

#endif
