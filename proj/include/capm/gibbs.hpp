#ifndef CAPM_GIBBS_HPP
#define CAPM_GIBBS_HPP

#include <cstdint>
#include <vector>

#include "capm/rng.hpp"
#include "capm/types.hpp"

namespace capm {

struct ChainConfig {
  int sweeps = 10000;
  int burn_in = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (sweeps <= 0) throw std::invalid_argument("ChainConfig: sweeps must be > 0");
    if (burn_in < 0 || burn_in >= sweeps)
      throw std::invalid_argument("ChainConfig: burn_in must be in [0, sweeps)");
  }
};

/// Current draw of the sampler. The partition is kept explicitly: labels map
/// each time index to a cluster, star holds the shared intercept of each
/// cluster, so alpha_it == star[labels[t]] by construction.
struct GibbsState {
  std::vector<int> labels;
  std::vector<double> star;
  std::vector<int> counts;
  double beta = 0.0;
  double sigma2 = 1.0;

  int size() const { return static_cast<int>(labels.size()); }
  int num_clusters() const { return static_cast<int>(star.size()); }
  double alpha(int t) const { return star[labels[t]]; }

  Partition partition() const;
  bool consistent() const;

  /// OLS start: single cluster at the OLS intercept, OLS slope, residual
  /// variance floored away from zero.
  static GibbsState initial(const AssetSeries& data, const HyperParams& h);
  static GibbsState initial(const AssetSeries& data, const HyperParams& h,
                            const Partition& p);
};

struct NormalParams {
  double mean = 0.0;
  double variance = 1.0;
};

struct InvGammaParams {
  double shape = 1.0;
  double scale = 1.0;
};

NormalParams beta_conditional(const GibbsState& s, const AssetSeries& data,
                              const HyperParams& h);
InvGammaParams sigma2_conditional(const GibbsState& s, const AssetSeries& data,
                                  const HyperParams& h);
NormalParams alpha_star_conditional(const GibbsState& s, const AssetSeries& data,
                                    const HyperParams& h, int cluster);
/// Distribution of a freshly drawn intercept for time t, given it opens a
/// new cluster.
NormalParams alpha_new_value_params(const GibbsState& s, const AssetSeries& data,
                                    const HyperParams& h, int t);

double step_beta(GibbsState& s, const AssetSeries& data, const HyperParams& h,
                 RngState& rng);
double step_sigma2(GibbsState& s, const AssetSeries& data, const HyperParams& h,
                   RngState& rng);
/// Mixture update of alpha_it: point masses at the other current values plus
/// a new-value component, with cluster bookkeeping.
double step_alpha_mixture(GibbsState& s, const AssetSeries& data,
                          const HyperParams& h, RngState& rng, int t);
/// Redraw every cluster intercept given the partition and broadcast.
void remix_alpha_star(GibbsState& s, const AssetSeries& data,
                      const HyperParams& h, RngState& rng);

PosteriorSummary run_unconstrained(const AssetSeries& data, const HyperParams& h,
                                   const ChainConfig& cfg);
PosteriorSummary run_fixed_partition(const AssetSeries& data, const Partition& p,
                                     const HyperParams& h, const ChainConfig& cfg);

/// sqrt(Var(batch means)/num_batches) over equal contiguous batches;
/// the trailing remainder of the chain is dropped.
double batch_means_mcse(const std::vector<double>& chain, int num_batches);

}  // namespace capm

#endif
