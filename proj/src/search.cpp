#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "capm/search.hpp"

namespace capm {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<int> CandidatePartition::outlier_set() const {
  std::vector<int> out = s1;
  out.insert(out.end(), s3.begin(), s3.end());
  std::sort(out.begin(), out.end());
  return out;
}

DeviationSet build_deviations(const Eigen::VectorXd& alpha_hat_B,
                              const OutlierCandidates& candidates) {
  if (candidates.empty())
    throw std::invalid_argument("build_deviations: empty candidate set");
  DeviationSet dev;
  dev.median_me = median(std::vector<double>(
      alpha_hat_B.data(), alpha_hat_B.data() + alpha_hat_B.size()));
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  for (int l : candidates.indices) {
    if (l < 0 || l >= alpha_hat_B.size())
      throw std::invalid_argument("build_deviations: candidate index out of range");
    const double d = alpha_hat_B[l] - dev.median_me;
    dev.deviations[l] = d;
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  dev.kappa = std::max(std::abs(dmin), std::abs(dmax)) + 1.0;
  dev.thresholds.reserve(dev.deviations.size() + 2);
  for (const auto& [l, d] : dev.deviations) dev.thresholds.push_back(d);
  dev.thresholds.push_back(dmin - dev.kappa);
  dev.thresholds.push_back(dmax + dev.kappa);
  std::sort(dev.thresholds.begin(), dev.thresholds.end());
  dev.thresholds.erase(
      std::unique(dev.thresholds.begin(), dev.thresholds.end()),
      dev.thresholds.end());
  return dev;
}

std::vector<CandidatePartition> generate_candidates(
    const DeviationSet& dev, int T, const OutlierCandidates& candidates) {
  std::vector<CandidatePartition> out;
  std::map<std::vector<int>, bool> seen;  // canonical labels -> kept

  auto emit = [&](std::vector<int> s1, std::vector<int> s3,
                  CandidateStructure structure) {
    CandidatePartition cand;
    cand.s1 = std::move(s1);
    cand.s3 = std::move(s3);
    cand.structure = structure;
    std::vector<int> raw(T, 0);  // cluster 0 = standard
    for (int l : cand.s1) raw[l] = 1;
    for (int l : cand.s3) raw[l] = structure == CandidateStructure::TwoCluster ? 1 : 2;
    cand.partition = Partition::from_labels(std::move(raw));
    for (int t = 0; t < T; ++t)
      if (std::find(cand.s1.begin(), cand.s1.end(), t) == cand.s1.end() &&
          std::find(cand.s3.begin(), cand.s3.end(), t) == cand.s3.end())
        cand.s2.push_back(t);
    auto [it, inserted] = seen.try_emplace(cand.partition.labels, true);
    if (inserted) out.push_back(std::move(cand));
  };

  for (double dL : dev.thresholds) {
    if (!(dL < 0.0)) continue;
    for (double dU : dev.thresholds) {
      if (!(dU >= 0.0)) continue;
      std::vector<int> s1, s3;
      for (const auto& [l, d] : dev.deviations) {
        if (d <= dL) s1.push_back(l);
        else if (d >= dU) s3.push_back(l);
      }
      if (s1.empty() && s3.empty()) continue;
      emit(s1, s3, CandidateStructure::ThreeCluster);
      emit(s1, s3, CandidateStructure::TwoCluster);
    }
  }
  (void)candidates;
  return out;
}

double score(const PosteriorSummary& bayes, const PosteriorSummary& conditional,
             int num_clusters, const CostWeights& w, int T) {
  if (bayes.alpha_hat.size() != T || conditional.alpha_hat.size() != T)
    throw std::invalid_argument("score: summary length mismatch");
  const double alpha_disc =
      (bayes.alpha_hat - conditional.alpha_hat).squaredNorm();
  const double beta_disc = bayes.beta_hat - conditional.beta_hat;
  const double sigma2_disc = bayes.sigma2_hat - conditional.sigma2_hat;
  return w.k1 / T * alpha_disc + w.k2 * beta_disc * beta_disc +
         w.k3 * sigma2_disc * sigma2_disc +
         w.cardinality_weight() * num_clusters;
}

double prs(double sc_reference, double sc_new) {
  if (!(sc_reference > 0))
    throw std::invalid_argument("prs: reference score must be > 0");
  return (sc_reference - sc_new) / sc_reference;
}

SelectionResult select_optimal(const AssetSeries& data, const HyperParams& h,
                               const CostWeights& w, const ChainConfig& cfg,
                               double lts_threshold) {
  data.validate();
  h.validate();
  w.validate();
  cfg.validate();
  const int T = static_cast<int>(data.size());
  const RngState root(cfg.seed);

  SelectionResult res;
  ChainConfig bayes_cfg = cfg;
  bayes_cfg.seed = root.derive(1).seed();
  res.bayes = run_unconstrained(data, h, bayes_cfg);

  res.prescreened = prescreen(data, lts_threshold, root.derive(2).seed());

  std::vector<CandidatePartition> candidates;
  CandidatePartition baseline;
  baseline.structure = CandidateStructure::Baseline;
  baseline.partition = Partition::single_cluster(T);
  for (int t = 0; t < T; ++t) baseline.s2.push_back(t);
  candidates.push_back(std::move(baseline));

  if (!res.prescreened.empty()) {
    res.deviations = build_deviations(res.bayes.alpha_hat, res.prescreened);
    auto generated = generate_candidates(res.deviations, T, res.prescreened);
    for (auto& c : generated) candidates.push_back(std::move(c));
  }

  res.all.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ChainConfig cand_cfg = cfg;
    cand_cfg.seed = root.derive(100 + i).seed();
    CandidateScore cs;
    cs.estimates = run_fixed_partition(data, candidates[i].partition, h, cand_cfg);
    cs.score = score(res.bayes, cs.estimates,
                     candidates[i].partition.num_clusters, w, T);
    cs.candidate = std::move(candidates[i]);
    res.all.push_back(std::move(cs));
  }

  auto better = [](const CandidateScore& a, const CandidateScore& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.candidate.partition.num_clusters != b.candidate.partition.num_clusters)
      return a.candidate.partition.num_clusters < b.candidate.partition.num_clusters;
    return a.candidate.outlier_set() < b.candidate.outlier_set();
  };
  res.best_index = 0;
  for (std::size_t i = 1; i < res.all.size(); ++i)
    if (better(res.all[i], res.all[res.best_index])) res.best_index = i;
  return res;
}

}  // namespace capm
