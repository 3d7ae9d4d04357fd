#ifndef CAPM_PIPELINE_HPP
#define CAPM_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capm/dataset.hpp"
#include "capm/search.hpp"

namespace capm {

struct RunConfig {
  HyperParams hyper;
  CostWeights weights;
  ChainConfig chain;
  double lts_threshold = 2.5;
  std::uint64_t master_seed = 0;
  std::vector<std::string> asset_filter;  // empty = all assets
  int workers = 1;

  void validate() const {
    hyper.validate();
    weights.validate();
    chain.validate();
    if (workers < 1) throw std::invalid_argument("RunConfig: workers must be >= 1");
  }
};

/// Apply `key = value` lines from a flat config file ('#' starts a comment).
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

struct RegressionLine {
  int cluster_id = 0;
  double alpha_star = 0.0;
  double beta = 0.0;
  std::vector<int> members;  // 1-based time indices
};

struct AssetReport {
  std::string asset_id;
  bool ok = false;
  std::string error;
  SelectionResult selection;          // valid when ok
  double prs_vs_baseline = 0.0;
  std::vector<RegressionLine> reglines;
  std::vector<int> suspect_candidates;  // prescreened points with small median deviation
};

std::string structure_name(CandidateStructure s);

AssetReport analyze_asset(const MarketDataset& md, const std::string& asset_id,
                          int asset_index, const RunConfig& cfg);

/// One report per selected asset, seeds derived from master_seed + asset index.
std::vector<AssetReport> run_pipeline(const MarketDataset& md, const RunConfig& cfg);

nlohmann::json report_to_json(const AssetReport& report);

/// report.json plus per-asset candidate and regression-line CSVs.
void write_outputs(const std::filesystem::path& out_dir,
                   const std::vector<AssetReport>& reports);

}  // namespace capm

#endif
