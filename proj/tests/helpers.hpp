#ifndef CAPM_TEST_HELPERS_HPP
#define CAPM_TEST_HELPERS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "capm/dataset.hpp"
#include "capm/partition_prior.hpp"
#include "capm/types.hpp"

namespace capm::test {

inline AssetSeries synthetic_series(int T, double beta, double sigma,
                                    const std::map<int, double>& shifts,
                                    std::uint64_t seed) {
  return excess_returns(make_synthetic_dataset(T, beta, sigma, shifts, seed),
                        "SYNTH");
}

inline AssetSeries series_from(const std::vector<double>& y,
                               const std::vector<double>& x) {
  AssetSeries s;
  s.asset_id = "TEST";
  s.y = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  s.x = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  s.dates.assign(y.size(), "1990-01");
  return s;
}

/// Exact posterior mean of (alpha*_1..alpha*_k, beta) given a partition,
/// under the normal-inverse-gamma hierarchy. Independent of sigma^2, so it
/// is also the unconditional-in-sigma^2 posterior mean.
inline Eigen::VectorXd conjugate_posterior_mean(const AssetSeries& data,
                                                const Partition& p,
                                                const HyperParams& h) {
  const int T = static_cast<int>(data.size());
  const int k = p.num_clusters;
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(T, k + 1);
  for (int t = 0; t < T; ++t) Z(t, p.labels[t]) = 1.0;
  Z.col(k) = data.x;
  Eigen::VectorXd prior_prec(k + 1), m0(k + 1);
  prior_prec.head(k).setConstant(1.0 / h.tau0_sq);
  prior_prec[k] = 1.0 / h.gamma0_sq;
  m0.head(k).setConstant(h.a);
  m0[k] = h.b;
  const Eigen::MatrixXd A =
      prior_prec.asDiagonal().toDenseMatrix() + Z.transpose() * Z;
  const Eigen::VectorXd rhs =
      prior_prec.cwiseProduct(m0) + Z.transpose() * data.y;
  return A.ldlt().solve(rhs);
}

/// Log marginal likelihood of y under a fixed partition (sigma^2 integrated
/// out): multivariate-t with scale I + Z V0 Z'.
inline double log_marginal_likelihood(const AssetSeries& data,
                                      const Partition& p, const HyperParams& h) {
  const int T = static_cast<int>(data.size());
  const int k = p.num_clusters;
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(T, k + 1);
  for (int t = 0; t < T; ++t) Z(t, p.labels[t]) = 1.0;
  Z.col(k) = data.x;
  Eigen::VectorXd v0diag(k + 1), m0(k + 1);
  v0diag.head(k).setConstant(h.tau0_sq);
  v0diag[k] = h.gamma0_sq;
  m0.head(k).setConstant(h.a);
  m0[k] = h.b;
  const Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(T, T) + Z * v0diag.asDiagonal() * Z.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  const Eigen::VectorXd r = data.y - Z * m0;
  const double quad = r.dot(llt.solve(r));
  double logdet = 0.0;
  for (int i = 0; i < T; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return std::lgamma(h.v0 + 0.5 * T) - std::lgamma(h.v0) +
         h.v0 * std::log(h.lambda0) - 0.5 * T * std::log(2.0 * std::numbers::pi) -
         0.5 * logdet - (h.v0 + 0.5 * T) * std::log(h.lambda0 + 0.5 * quad);
}

/// Exact E[beta | y] for small T by mixing the per-partition conjugate
/// posteriors over the product-distribution prior.
inline double exact_beta_posterior_mean(const AssetSeries& data,
                                        const HyperParams& h) {
  const int T = static_cast<int>(data.size());
  const auto parts = enumerate_partitions(T);
  double max_lw = -std::numeric_limits<double>::infinity();
  std::vector<double> lws(parts.size());
  std::vector<double> betas(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    lws[i] = log_partition_prior_unnormalized(parts[i], h.c) +
             log_marginal_likelihood(data, parts[i], h);
    betas[i] = conjugate_posterior_mean(data, parts[i], h)[parts[i].num_clusters];
    max_lw = std::max(max_lw, lws[i]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double w = std::exp(lws[i] - max_lw);
    num += w * betas[i];
    den += w;
  }
  return num / den;
}

}  // namespace capm::test

#endif
