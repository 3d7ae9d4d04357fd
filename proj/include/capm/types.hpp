#ifndef CAPM_TYPES_HPP
#define CAPM_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace capm {

/// Excess returns of one asset over T periods, paired with market excess returns.
struct AssetSeries {
  std::string asset_id;
  Eigen::VectorXd y;  // asset excess returns
  Eigen::VectorXd x;  // market excess returns
  std::vector<std::string> dates;

  Eigen::Index size() const { return y.size(); }

  void validate() const {
    const Eigen::Index T = y.size();
    if (T < 3) throw std::invalid_argument("AssetSeries: need at least 3 periods");
    if (x.size() != T || static_cast<Eigen::Index>(dates.size()) != T)
      throw std::invalid_argument("AssetSeries: y, x and dates must have equal length");
    if (!y.allFinite() || !x.allFinite())
      throw std::invalid_argument("AssetSeries: non-finite entry");
  }
};

/// Assignment of time indices 0..T-1 to clusters. Labels are canonical:
/// cluster ids appear in order of first occurrence, so two partitions are
/// equal iff they induce the same grouping.
struct Partition {
  std::vector<int> labels;
  int num_clusters = 0;

  static Partition from_labels(std::vector<int> raw);
  static Partition single_cluster(int T);
  static Partition singletons(int T);
  static Partition from_clusters(int T, const std::vector<std::vector<int>>& clusters);

  int size() const { return static_cast<int>(labels.size()); }
  std::vector<int> cluster_sizes() const;
  std::vector<std::vector<int>> members() const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.labels == b.labels;
  }
  friend auto operator<=>(const Partition& a, const Partition& b) {
    return a.labels <=> b.labels;
  }
};

/// Prior constants of the hierarchical model.
struct HyperParams {
  double a = 0.0;
  double b = 1.0;
  double tau0_sq = 1000.0;
  double gamma0_sq = 1000.0;
  double v0 = 2.0001;
  double lambda0 = 0.010001;
  double c = 1.0;

  void validate() const {
    if (tau0_sq <= 0) throw std::invalid_argument("HyperParams: tau0_sq must be > 0");
    if (gamma0_sq <= 0) throw std::invalid_argument("HyperParams: gamma0_sq must be > 0");
    if (lambda0 <= 0) throw std::invalid_argument("HyperParams: lambda0 must be > 0");
    if (v0 <= 1) throw std::invalid_argument("HyperParams: v0 must be > 1");
    if (c <= 0) throw std::invalid_argument("HyperParams: c must be > 0");
  }
};

/// Cost-complexity weights of the score function.
struct CostWeights {
  double k1 = 1000.0 / 2012.0;
  double k2 = 1000.0 / 2012.0;
  double k3 = 1.0 / 2012.0;

  double cardinality_weight() const { return 1.0 - k1 - k2 - k3; }

  void validate() const {
    if (k1 < 0 || k2 < 0 || k3 < 0)
      throw std::invalid_argument("CostWeights: weights must be nonnegative");
    if (k1 + k2 + k3 > 1.0)
      throw std::invalid_argument("CostWeights: k1+k2+k3 must be <= 1");
  }
};

/// Ergodic-average estimates with batch-means Monte Carlo standard errors.
struct PosteriorSummary {
  Eigen::VectorXd alpha_hat;
  double beta_hat = 0.0;
  double sigma2_hat = 0.0;
  Eigen::VectorXd mcse_alpha;
  double mcse_beta = 0.0;
  double mcse_sigma2 = 0.0;
  int sweeps_used = 0;
};

}  // namespace capm

#endif
