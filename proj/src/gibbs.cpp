#include <algorithm>
#include <cmath>
#include <numeric>

#include "capm/gibbs.hpp"

namespace capm {

Partition GibbsState::partition() const {
  return Partition::from_labels(labels);
}

bool GibbsState::consistent() const {
  if (star.size() != counts.size()) return false;
  std::vector<int> seen(star.size(), 0);
  for (int lab : labels) {
    if (lab < 0 || lab >= num_clusters()) return false;
    ++seen[lab];
  }
  return seen == counts && sigma2 > 0;
}

namespace {

struct OlsFit {
  double intercept, slope, resid_var;
};

OlsFit ols(const AssetSeries& data) {
  const auto T = static_cast<double>(data.size());
  const double mx = data.x.mean();
  const double my = data.y.mean();
  const double sxx = (data.x.array() - mx).square().sum();
  const double sxy = ((data.x.array() - mx) * (data.y.array() - my)).sum();
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  const double intercept = my - slope * mx;
  const double rss =
      (data.y.array() - intercept - slope * data.x.array()).square().sum();
  return {intercept, slope, rss / T};
}

}  // namespace

GibbsState GibbsState::initial(const AssetSeries& data, const HyperParams& h) {
  return initial(data, h, Partition::single_cluster(static_cast<int>(data.size())));
}

GibbsState GibbsState::initial(const AssetSeries& data, const HyperParams& h,
                               const Partition& p) {
  data.validate();
  h.validate();
  if (p.size() != data.size())
    throw std::invalid_argument("GibbsState: partition length does not match series");
  const OlsFit fit = ols(data);
  GibbsState s;
  s.labels = p.labels;
  s.star.assign(p.num_clusters, fit.intercept);
  s.counts = p.cluster_sizes();
  s.beta = fit.slope;
  const double floor = h.lambda0 / (h.v0 - 1.0) / 100.0;
  s.sigma2 = std::max(fit.resid_var, floor);
  return s;
}

NormalParams beta_conditional(const GibbsState& s, const AssetSeries& data,
                              const HyperParams& h) {
  const int T = s.size();
  double num = h.b / h.gamma0_sq;
  double den = 1.0 / h.gamma0_sq;
  for (int t = 0; t < T; ++t) {
    num += (data.y[t] - s.alpha(t)) * data.x[t];
    den += data.x[t] * data.x[t];
  }
  return {num / den, s.sigma2 / den};
}

InvGammaParams sigma2_conditional(const GibbsState& s, const AssetSeries& data,
                                  const HyperParams& h) {
  const int T = s.size();
  const int nc = s.num_clusters();
  double scale = h.lambda0 + (s.beta - h.b) * (s.beta - h.b) / (2.0 * h.gamma0_sq);
  double ss_star = 0.0;
  for (double a_star : s.star) ss_star += (a_star - h.a) * (a_star - h.a);
  scale += ss_star / (2.0 * h.tau0_sq);
  double rss = 0.0;
  for (int t = 0; t < T; ++t) {
    const double r = data.y[t] - s.alpha(t) - s.beta * data.x[t];
    rss += r * r;
  }
  scale += 0.5 * rss;
  return {h.v0 + (T + nc + 1) / 2.0, scale};
}

NormalParams alpha_star_conditional(const GibbsState& s, const AssetSeries& data,
                                    const HyperParams& h, int cluster) {
  double sum = 0.0;
  for (int t = 0; t < s.size(); ++t)
    if (s.labels[t] == cluster) sum += data.y[t] - s.beta * data.x[t];
  const double den = s.counts[cluster] + 1.0 / h.tau0_sq;
  return {(sum + h.a / h.tau0_sq) / den, s.sigma2 / den};
}

NormalParams alpha_new_value_params(const GibbsState& s, const AssetSeries& data,
                                    const HyperParams& h, int t) {
  const double z = data.y[t] - s.beta * data.x[t];
  const double den = 1.0 + 1.0 / h.tau0_sq;
  return {(z + h.a / h.tau0_sq) / den, s.sigma2 / den};
}

double step_beta(GibbsState& s, const AssetSeries& data, const HyperParams& h,
                 RngState& rng) {
  const NormalParams p = beta_conditional(s, data, h);
  s.beta = sample_normal(rng, p.mean, p.variance);
  return s.beta;
}

double step_sigma2(GibbsState& s, const AssetSeries& data, const HyperParams& h,
                   RngState& rng) {
  const InvGammaParams p = sigma2_conditional(s, data, h);
  s.sigma2 = sample_inverse_gamma(rng, p.shape, p.scale);
  return s.sigma2;
}

namespace {

// Drop cluster d (must be empty) by moving the last cluster into its slot.
void compact_cluster(GibbsState& s, int d) {
  const int last = s.num_clusters() - 1;
  if (d != last) {
    s.star[d] = s.star[last];
    s.counts[d] = s.counts[last];
    for (int& lab : s.labels)
      if (lab == last) lab = d;
  }
  s.star.pop_back();
  s.counts.pop_back();
}

}  // namespace

double step_alpha_mixture(GibbsState& s, const AssetSeries& data,
                          const HyperParams& h, RngState& rng, int t) {
  if (t < 0 || t >= s.size())
    throw std::invalid_argument("step_alpha_mixture: t out of range");
  const int old = s.labels[t];
  --s.counts[old];

  const int nc = s.num_clusters();
  const double inv2sig = 1.0 / (2.0 * s.sigma2);
  const double yt = data.y[t];
  const double bx = s.beta * data.x[t];

  // One weight per existing cluster (the sum over j != t collapses to a
  // count factor), plus the new-value component at the end.
  std::vector<double> lw(nc + 1);
  for (int d = 0; d < nc; ++d) {
    if (s.counts[d] == 0) {
      lw[d] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double r = yt - s.star[d] - bx;
    lw[d] = std::log(static_cast<double>(s.counts[d])) - r * r * inv2sig;
  }
  const double zr = yt - bx - h.a;
  lw[nc] = std::log(h.c) - zr * zr / (2.0 * s.sigma2 * (1.0 + h.tau0_sq)) -
           0.5 * std::log(1.0 + h.tau0_sq);

  const int pick = sample_categorical(rng, lw);
  if (pick < nc) {
    s.labels[t] = pick;
    ++s.counts[pick];
  } else if (s.counts[old] == 0) {
    // t was a singleton: reuse its slot for the fresh value
    const NormalParams p = alpha_new_value_params(s, data, h, t);
    s.star[old] = sample_normal(rng, p.mean, p.variance);
    s.labels[t] = old;
    s.counts[old] = 1;
  } else {
    const NormalParams p = alpha_new_value_params(s, data, h, t);
    s.star.push_back(sample_normal(rng, p.mean, p.variance));
    s.counts.push_back(1);
    s.labels[t] = s.num_clusters() - 1;
  }
  if (s.counts[old] == 0) compact_cluster(s, old);
  return s.alpha(t);
}

void remix_alpha_star(GibbsState& s, const AssetSeries& data,
                      const HyperParams& h, RngState& rng) {
  for (int d = 0; d < s.num_clusters(); ++d) {
    const NormalParams p = alpha_star_conditional(s, data, h, d);
    s.star[d] = sample_normal(rng, p.mean, p.variance);
  }
}

double batch_means_mcse(const std::vector<double>& chain, int num_batches) {
  if (num_batches < 2)
    throw std::invalid_argument("batch_means_mcse: need at least 2 batches");
  const auto n = static_cast<int>(chain.size());
  if (n < 2 * num_batches)
    throw std::invalid_argument("batch_means_mcse: chain too short");
  const int len = n / num_batches;
  std::vector<double> means(num_batches);
  for (int b = 0; b < num_batches; ++b) {
    double sum = 0.0;
    for (int i = b * len; i < (b + 1) * len; ++i) sum += chain[i];
    means[b] = sum / len;
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / num_batches;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (num_batches - 1);
  return std::sqrt(var / num_batches);
}

namespace {

constexpr int kMcseBatches = 30;

struct ChainAccumulator {
  int T, kept = 0, num_batches, batch_len, batched;
  Eigen::VectorXd alpha_sum;
  double beta_sum = 0.0, sigma2_sum = 0.0;
  Eigen::MatrixXd alpha_batch;  // num_batches x T
  std::vector<double> beta_batch, sigma2_batch;

  ChainAccumulator(int T_, int n_kept) : T(T_) {
    num_batches = std::min(kMcseBatches, n_kept / 2);
    batch_len = num_batches >= 2 ? n_kept / num_batches : n_kept;
    batched = num_batches >= 2 ? num_batches * batch_len : 0;
    alpha_sum = Eigen::VectorXd::Zero(T);
    if (num_batches >= 2) {
      alpha_batch = Eigen::MatrixXd::Zero(num_batches, T);
      beta_batch.assign(num_batches, 0.0);
      sigma2_batch.assign(num_batches, 0.0);
    }
  }

  void add(const GibbsState& s) {
    for (int t = 0; t < T; ++t) alpha_sum[t] += s.alpha(t);
    beta_sum += s.beta;
    sigma2_sum += s.sigma2;
    if (kept < batched) {
      const int b = kept / batch_len;
      for (int t = 0; t < T; ++t) alpha_batch(b, t) += s.alpha(t);
      beta_batch[b] += s.beta;
      sigma2_batch[b] += s.sigma2;
    }
    ++kept;
  }

  static double mcse_of(std::vector<double> batch_sums, int len) {
    const int nb = static_cast<int>(batch_sums.size());
    for (double& v : batch_sums) v /= len;
    const double grand =
        std::accumulate(batch_sums.begin(), batch_sums.end(), 0.0) / nb;
    double var = 0.0;
    for (double m : batch_sums) var += (m - grand) * (m - grand);
    return std::sqrt(var / (nb - 1) / nb);
  }

  PosteriorSummary summary() const {
    PosteriorSummary out;
    out.alpha_hat = alpha_sum / kept;
    out.beta_hat = beta_sum / kept;
    out.sigma2_hat = sigma2_sum / kept;
    out.sweeps_used = kept;
    out.mcse_alpha = Eigen::VectorXd::Zero(T);
    if (num_batches >= 2) {
      for (int t = 0; t < T; ++t) {
        std::vector<double> col(num_batches);
        for (int b = 0; b < num_batches; ++b) col[b] = alpha_batch(b, t);
        out.mcse_alpha[t] = mcse_of(col, batch_len);
      }
      out.mcse_beta = mcse_of(beta_batch, batch_len);
      out.mcse_sigma2 = mcse_of(sigma2_batch, batch_len);
    }
    return out;
  }
};

}  // namespace

PosteriorSummary run_unconstrained(const AssetSeries& data, const HyperParams& h,
                                   const ChainConfig& cfg) {
  cfg.validate();
  GibbsState s = GibbsState::initial(data, h);
  RngState rng(cfg.seed);
  const int T = s.size();
  ChainAccumulator acc(T, cfg.sweeps - cfg.burn_in);
  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    step_beta(s, data, h, rng);
    step_sigma2(s, data, h, rng);
    for (int t = 0; t < T; ++t) step_alpha_mixture(s, data, h, rng, t);
    remix_alpha_star(s, data, h, rng);
    if (sweep >= cfg.burn_in) acc.add(s);
  }
  return acc.summary();
}

PosteriorSummary run_fixed_partition(const AssetSeries& data, const Partition& p,
                                     const HyperParams& h, const ChainConfig& cfg) {
  cfg.validate();
  GibbsState s = GibbsState::initial(data, h, p);
  RngState rng(cfg.seed);
  ChainAccumulator acc(s.size(), cfg.sweeps - cfg.burn_in);
  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    step_beta(s, data, h, rng);
    step_sigma2(s, data, h, rng);
    remix_alpha_star(s, data, h, rng);
    if (sweep >= cfg.burn_in) acc.add(s);
  }
  return acc.summary();
}

}  // namespace capm
