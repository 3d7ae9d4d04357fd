#include <cmath>
#include <limits>
#include <stdexcept>

#include "capm/rng.hpp"

namespace capm {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngState RngState::derive(std::uint64_t salt) const {
  return RngState(splitmix64(seed_ ^ splitmix64(salt)));
}

double sample_normal(RngState& rng, double mean, double variance) {
  if (!(variance > 0))
    throw std::invalid_argument("sample_normal: variance must be > 0");
  std::normal_distribution<double> dist(0.0, 1.0);
  return mean + std::sqrt(variance) * dist(rng.gen());
}

double sample_inverse_gamma(RngState& rng, double shape, double scale) {
  if (!(shape > 0) || !(scale > 0))
    throw std::invalid_argument("sample_inverse_gamma: parameters must be > 0");
  std::gamma_distribution<double> dist(shape, 1.0 / scale);
  double g = 0.0;
  do {
    g = dist(rng.gen());
  } while (g <= 0.0);
  return 1.0 / g;
}

int sample_categorical(RngState& rng, const std::vector<double>& log_weights) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double max_lw = neg_inf;
  for (double lw : log_weights) max_lw = std::max(max_lw, lw);
  if (max_lw == neg_inf || std::isnan(max_lw))
    throw std::invalid_argument("sample_categorical: no finite log weight");

  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - max_lw);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng.gen()) * total;
  double cum = 0.0;
  int last_finite = 0;
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    const double w = std::exp(log_weights[j] - max_lw);
    if (w > 0.0) last_finite = static_cast<int>(j);
    cum += w;
    if (u < cum) return static_cast<int>(j);
  }
  return last_finite;  // u landed on the floating-point tail
}

}  // namespace capm
