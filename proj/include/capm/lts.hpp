#ifndef CAPM_LTS_HPP
#define CAPM_LTS_HPP

#include <cstdint>
#include <vector>

#include "capm/types.hpp"

namespace capm {

struct LtsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double scale = 0.0;       // consistency-corrected trimmed residual scale
  double objective = 0.0;   // sum of the h smallest squared residuals
  int h = 0;
  Eigen::VectorXd residuals;
  Eigen::VectorXd std_residuals;
};

struct OutlierCandidates {
  std::vector<int> indices;  // 0-based time indices, ascending

  bool empty() const { return indices.empty(); }
};

/// Maximal-breakdown coverage for simple regression with intercept.
inline int lts_default_coverage(int T) { return (T + 3) / 2; }

enum class LtsSearch { Auto, Exhaustive, RandomStarts };

/// Least trimmed squares line fit. Exhaustive over all 2-point elemental
/// fits for T <= 30 (or when forced), otherwise 500 random elemental
/// starts; every start is refined by concentration steps.
LtsFit fit_lts(const Eigen::VectorXd& y, const Eigen::VectorXd& x, int h,
               std::uint64_t seed, LtsSearch mode = LtsSearch::Auto);

/// Time points whose absolute standardized LTS residual exceeds threshold.
OutlierCandidates prescreen(const AssetSeries& data, double threshold,
                            std::uint64_t seed);
OutlierCandidates prescreen(const AssetSeries& data, double threshold,
                            std::uint64_t seed, int h);

double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

}  // namespace capm

#endif
