#ifndef CAPM_SEARCH_HPP
#define CAPM_SEARCH_HPP

#include <map>
#include <vector>

#include "capm/gibbs.hpp"
#include "capm/lts.hpp"
#include "capm/types.hpp"

namespace capm {

/// Median deviations of the prescreened points plus the two sentinel cut
/// values that allow "select none on this side".
struct DeviationSet {
  std::map<int, double> deviations;  // time index -> alpha_hat_B - me
  double median_me = 0.0;
  double kappa = 0.0;
  std::vector<double> thresholds;  // sorted, deduplicated
};

enum class CandidateStructure { ThreeCluster, TwoCluster, Baseline };

struct CandidatePartition {
  std::vector<int> s1;  // anomalous low values
  std::vector<int> s2;  // standard observations
  std::vector<int> s3;  // anomalous high values
  CandidateStructure structure = CandidateStructure::Baseline;
  Partition partition;

  std::vector<int> outlier_set() const;  // s1 and s3 merged, ascending
};

struct CandidateScore {
  CandidatePartition candidate;
  PosteriorSummary estimates;
  double score = 0.0;
};

struct SelectionResult {
  std::size_t best_index = 0;
  std::vector<CandidateScore> all;  // index 0 is the single-cluster baseline
  PosteriorSummary bayes;
  OutlierCandidates prescreened;
  DeviationSet deviations;

  const CandidateScore& best() const { return all[best_index]; }
};

DeviationSet build_deviations(const Eigen::VectorXd& alpha_hat_B,
                              const OutlierCandidates& candidates);

/// All partitions induced by cut pairs (dL < 0 <= dU) over the threshold set,
/// in both the three-cluster and merged two-cluster structures, deduplicated.
std::vector<CandidatePartition> generate_candidates(
    const DeviationSet& dev, int T, const OutlierCandidates& candidates);

double score(const PosteriorSummary& bayes, const PosteriorSummary& conditional,
             int num_clusters, const CostWeights& w, int T);

/// Full per-asset pipeline: unconstrained chain, LTS prescreen, candidate
/// construction, a fixed-partition chain per candidate, argmin by score.
SelectionResult select_optimal(const AssetSeries& data, const HyperParams& h,
                               const CostWeights& w, const ChainConfig& cfg,
                               double lts_threshold = 2.5);

/// Proportional reduction in score.
double prs(double sc_reference, double sc_new);

double median(std::vector<double> values);

}  // namespace capm

#endif
