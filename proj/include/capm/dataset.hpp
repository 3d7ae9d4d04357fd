#ifndef CAPM_DATASET_HPP
#define CAPM_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "capm/types.hpp"

namespace capm {

/// Raw returns as ingested: risk-free, market index and per-asset series.
struct MarketDataset {
  std::vector<std::string> dates;
  Eigen::VectorXd risk_free;
  Eigen::VectorXd market_return;
  std::vector<std::string> asset_ids;   // column order preserved
  std::vector<Eigen::VectorXd> assets;

  Eigen::Index periods() const { return risk_free.size(); }
  int num_assets() const { return static_cast<int>(asset_ids.size()); }
};

/// Parse a returns CSV with header `date,rf,market,<asset>...`.
/// Strictly rectangular; duplicate or out-of-order dates are rejected.
MarketDataset ingest_csv(const std::filesystem::path& path);

/// y_t = R_it - R_ft, x_t = R_Mt - R_ft for one asset.
AssetSeries excess_returns(const MarketDataset& md, const std::string& asset_id);

/// Synthetic CAPM dataset: x_t ~ N(0, 0.05^2), y_t = shift_t + beta x_t + noise.
/// Shift keys are 1-based time indices.
MarketDataset make_synthetic_dataset(int T, double beta, double sigma,
                                     const std::map<int, double>& shifts,
                                     std::uint64_t seed);

/// Write a synthetic dataset in the ingest format, plus a ground-truth
/// sidecar `synthetic_truth.json` next to it.
void emit_synthetic(int T, double beta, double sigma,
                    const std::map<int, double>& shifts, std::uint64_t seed,
                    const std::filesystem::path& path);

/// Whole-file atomic write (temp file then rename).
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace capm

#endif
