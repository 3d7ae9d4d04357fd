#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "capm/lts.hpp"

namespace capm {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

constexpr int kRandomStarts = 500;
constexpr int kMaxCSteps = 50;
constexpr double kCStepTol = 1e-12;

struct Line {
  double intercept, slope;
};

double objective(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                 const Line& l, int h, std::vector<double>& scratch) {
  const auto T = static_cast<int>(y.size());
  scratch.resize(T);
  for (int t = 0; t < T; ++t) {
    const double r = y[t] - l.intercept - l.slope * x[t];
    scratch[t] = r * r;
  }
  std::nth_element(scratch.begin(), scratch.begin() + (h - 1), scratch.end());
  double sum = 0.0;
  for (int t = 0; t < h; ++t) sum += scratch[t];
  return sum;
}

// OLS on the h indices with smallest squared residuals under l.
Line refit_on_coverage(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                       const Line& l, int h, std::vector<int>& idx) {
  const auto T = static_cast<int>(y.size());
  idx.resize(T);
  for (int t = 0; t < T; ++t) idx[t] = t;
  auto sq = [&](int t) {
    const double r = y[t] - l.intercept - l.slope * x[t];
    return r * r;
  };
  std::nth_element(idx.begin(), idx.begin() + (h - 1), idx.end(),
                   [&](int a, int b) { return sq(a) < sq(b); });
  double sx = 0, sy = 0;
  for (int i = 0; i < h; ++i) {
    sx += x[idx[i]];
    sy += y[idx[i]];
  }
  const double mx = sx / h, my = sy / h;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < h; ++i) {
    sxx += (x[idx[i]] - mx) * (x[idx[i]] - mx);
    sxy += (x[idx[i]] - mx) * (y[idx[i]] - my);
  }
  if (sxx <= 0.0) return {my - l.slope * mx, l.slope};  // covered x degenerate
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

// Concentration steps from an elemental start until the objective stalls.
std::pair<Line, double> concentrate(const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& x, Line l, int h,
                                    std::vector<double>& scratch,
                                    std::vector<int>& idx) {
  double obj = objective(y, x, l, h, scratch);
  for (int it = 0; it < kMaxCSteps; ++it) {
    const Line next = refit_on_coverage(y, x, l, h, idx);
    const double next_obj = objective(y, x, next, h, scratch);
    if (next_obj > obj - kCStepTol) {
      if (next_obj < obj) return {next, next_obj};
      return {l, obj};
    }
    l = next;
    obj = next_obj;
  }
  return {l, obj};
}

}  // namespace

LtsFit fit_lts(const Eigen::VectorXd& y, const Eigen::VectorXd& x, int h,
               std::uint64_t seed, LtsSearch mode) {
  const auto T = static_cast<int>(y.size());
  if (T < 4) throw std::invalid_argument("fit_lts: need at least 4 points");
  if (x.size() != T) throw std::invalid_argument("fit_lts: length mismatch");
  const int h_min = std::max(2, (T + 1) / 2);
  if (h < h_min || h > T) throw std::invalid_argument("fit_lts: h out of range");
  if (x.maxCoeff() == x.minCoeff())
    throw std::invalid_argument("fit_lts: degenerate design, x is constant");

  std::vector<double> scratch;
  std::vector<int> idx;
  Line best{0.0, 0.0};
  double best_obj = std::numeric_limits<double>::infinity();

  auto try_start = [&](int i, int j) {
    if (x[i] == x[j]) return;
    const double slope = (y[j] - y[i]) / (x[j] - x[i]);
    Line l{y[i] - slope * x[i], slope};
    auto [refined, obj] = concentrate(y, x, l, h, scratch, idx);
    if (obj < best_obj) {
      best_obj = obj;
      best = refined;
    }
  };

  const bool exhaustive =
      mode == LtsSearch::Exhaustive || (mode == LtsSearch::Auto && T <= 30);
  if (exhaustive) {
    for (int i = 0; i < T; ++i)
      for (int j = i + 1; j < T; ++j) try_start(i, j);
  } else {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> pick(0, T - 1);
    for (int s = 0; s < kRandomStarts; ++s) {
      int i = pick(gen), j = pick(gen);
      int guard = 0;
      while ((j == i || x[i] == x[j]) && ++guard < 1000) j = pick(gen);
      if (j == i || x[i] == x[j]) continue;
      try_start(i, j);
    }
  }

  LtsFit fit;
  fit.intercept = best.intercept;
  fit.slope = best.slope;
  fit.objective = best_obj;
  fit.h = h;
  fit.residuals = y.array() - best.intercept - best.slope * x.array();

  // trimmed RMS, corrected for the truncation of the normal at coverage h/T
  const double cov = static_cast<double>(h) / T;
  const double q = normal_quantile((1.0 + cov) / 2.0);
  const double consistency = 1.0 - 2.0 * q * normal_pdf(q) / cov;
  double scale = std::sqrt(best_obj / h) / std::sqrt(consistency);
  fit.scale = std::max(scale, std::numeric_limits<double>::min());
  fit.std_residuals = fit.residuals / fit.scale;
  return fit;
}

OutlierCandidates prescreen(const AssetSeries& data, double threshold,
                            std::uint64_t seed) {
  return prescreen(data, threshold, seed,
                   lts_default_coverage(static_cast<int>(data.size())));
}

OutlierCandidates prescreen(const AssetSeries& data, double threshold,
                            std::uint64_t seed, int h) {
  data.validate();
  const LtsFit fit = fit_lts(data.y, data.x, h, seed);
  OutlierCandidates out;
  for (int t = 0; t < static_cast<int>(data.size()); ++t)
    if (std::abs(fit.std_residuals[t]) > threshold) out.indices.push_back(t);
  return out;
}

}  // namespace capm
