#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <semaphore>
#include <sstream>

#include "capm/pipeline.hpp"
#include "capm/rng.hpp"

namespace capm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(row) +
                               ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "a") cfg.hyper.a = std::stod(value);
      else if (key == "b") cfg.hyper.b = std::stod(value);
      else if (key == "tau0_sq") cfg.hyper.tau0_sq = std::stod(value);
      else if (key == "gamma0_sq") cfg.hyper.gamma0_sq = std::stod(value);
      else if (key == "v0") cfg.hyper.v0 = std::stod(value);
      else if (key == "lambda0") cfg.hyper.lambda0 = std::stod(value);
      else if (key == "c") cfg.hyper.c = std::stod(value);
      else if (key == "k1") cfg.weights.k1 = std::stod(value);
      else if (key == "k2") cfg.weights.k2 = std::stod(value);
      else if (key == "k3") cfg.weights.k3 = std::stod(value);
      else if (key == "sweeps") cfg.chain.sweeps = std::stoi(value);
      else if (key == "burn_in") cfg.chain.burn_in = std::stoi(value);
      else if (key == "lts_threshold") cfg.lts_threshold = std::stod(value);
      else if (key == "master_seed") cfg.master_seed = std::stoull(value);
      else if (key == "workers") cfg.workers = std::stoi(value);
      else if (key == "assets") cfg.asset_filter = split_list(value);
      else
        throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception&) {
      throw std::runtime_error("config line " + std::to_string(row) +
                               ": bad value for '" + key + "'");
    }
  }
}

std::string structure_name(CandidateStructure s) {
  switch (s) {
    case CandidateStructure::ThreeCluster: return "three-cluster";
    case CandidateStructure::TwoCluster: return "two-cluster";
    case CandidateStructure::Baseline: return "baseline";
  }
  return "?";
}

namespace {

std::vector<int> one_based(const std::vector<int>& v) {
  std::vector<int> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](int t) { return t + 1; });
  return out;
}

}  // namespace

AssetReport analyze_asset(const MarketDataset& md, const std::string& asset_id,
                          int asset_index, const RunConfig& cfg) {
  AssetReport report;
  report.asset_id = asset_id;
  try {
    const AssetSeries series = excess_returns(md, asset_id);
    ChainConfig chain = cfg.chain;
    chain.seed = RngState(cfg.master_seed)
                     .derive(static_cast<std::uint64_t>(asset_index))
                     .seed();
    report.selection = select_optimal(series, cfg.hyper, cfg.weights, chain,
                                      cfg.lts_threshold);

    const double baseline_score = report.selection.all.front().score;
    report.prs_vs_baseline = prs(baseline_score, report.selection.best().score);

    // per-cluster regression lines of the winning partition
    const auto& best = report.selection.best();
    const auto members = best.candidate.partition.members();
    for (int d = 0; d < best.candidate.partition.num_clusters; ++d) {
      RegressionLine rl;
      rl.cluster_id = d;
      rl.alpha_star = best.estimates.alpha_hat[members[d].front()];
      rl.beta = best.estimates.beta_hat;
      rl.members = one_based(members[d]);
      report.reglines.push_back(std::move(rl));
    }

    // prescreened points whose Bayes intercept barely deviates from the
    // median are suspect LTS subsample-sensitivity artifacts
    if (!report.selection.prescreened.empty()) {
      const auto& alpha = report.selection.bayes.alpha_hat;
      const double me = median(
          std::vector<double>(alpha.data(), alpha.data() + alpha.size()));
      std::vector<double> abs_dev(alpha.size());
      for (Eigen::Index t = 0; t < alpha.size(); ++t)
        abs_dev[t] = std::abs(alpha[t] - me);
      const double mad = median(abs_dev);
      for (int l : report.selection.prescreened.indices)
        if (std::abs(alpha[l] - me) < 1.5 * mad)
          report.suspect_candidates.push_back(l + 1);
    }
    report.ok = true;
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  return report;
}

std::vector<AssetReport> run_pipeline(const MarketDataset& md,
                                      const RunConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<int, std::string>> selected;
  for (int a = 0; a < md.num_assets(); ++a) {
    if (cfg.asset_filter.empty() ||
        std::find(cfg.asset_filter.begin(), cfg.asset_filter.end(),
                  md.asset_ids[a]) != cfg.asset_filter.end())
      selected.emplace_back(a, md.asset_ids[a]);
  }
  for (const auto& id : cfg.asset_filter)
    if (std::find(md.asset_ids.begin(), md.asset_ids.end(), id) ==
        md.asset_ids.end())
      throw std::invalid_argument("unknown asset in filter: " + id);

  std::vector<AssetReport> reports(selected.size());
  if (cfg.workers == 1 || selected.size() <= 1) {
    for (std::size_t i = 0; i < selected.size(); ++i)
      reports[i] = analyze_asset(md, selected[i].second, selected[i].first, cfg);
  } else {
    std::counting_semaphore<> slots(cfg.workers);
    std::vector<std::future<void>> futures;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      futures.push_back(std::async(std::launch::async, [&, i] {
        slots.acquire();
        reports[i] = analyze_asset(md, selected[i].second, selected[i].first, cfg);
        slots.release();
      }));
    }
    for (auto& f : futures) f.get();
  }
  return reports;
}

namespace {

nlohmann::json summary_to_json(const PosteriorSummary& s) {
  nlohmann::json j;
  j["alpha_hat"] = std::vector<double>(s.alpha_hat.data(),
                                       s.alpha_hat.data() + s.alpha_hat.size());
  j["beta_hat"] = s.beta_hat;
  j["sigma2_hat"] = s.sigma2_hat;
  j["mcse_alpha"] = std::vector<double>(
      s.mcse_alpha.data(), s.mcse_alpha.data() + s.mcse_alpha.size());
  j["mcse_beta"] = s.mcse_beta;
  j["mcse_sigma2"] = s.mcse_sigma2;
  j["sweeps_used"] = s.sweeps_used;
  return j;
}

std::string join(const std::vector<int>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

nlohmann::json report_to_json(const AssetReport& report) {
  nlohmann::json j;
  j["asset_id"] = report.asset_id;
  j["ok"] = report.ok;
  if (!report.ok) {
    j["error"] = report.error;
    return j;
  }
  const auto& sel = report.selection;
  j["bayes"] = summary_to_json(sel.bayes);
  j["lts_candidates"] = one_based(sel.prescreened.indices);
  j["suspect_candidates"] = report.suspect_candidates;

  nlohmann::json cands = nlohmann::json::array();
  for (std::size_t i = 0; i < sel.all.size(); ++i) {
    const auto& cs = sel.all[i];
    nlohmann::json c;
    c["candidate_index"] = i;
    c["structure"] = structure_name(cs.candidate.structure);
    c["s1"] = one_based(cs.candidate.s1);
    c["s3"] = one_based(cs.candidate.s3);
    c["num_clusters"] = cs.candidate.partition.num_clusters;
    c["score"] = cs.score;
    cands.push_back(std::move(c));
  }
  j["candidates"] = std::move(cands);

  const auto& best = sel.best();
  j["best"]["candidate_index"] = sel.best_index;
  j["best"]["structure"] = structure_name(best.candidate.structure);
  j["best"]["s1"] = one_based(best.candidate.s1);
  j["best"]["s3"] = one_based(best.candidate.s3);
  j["best"]["outliers"] = one_based(best.candidate.outlier_set());
  j["best"]["score"] = best.score;
  j["best"]["estimates"] = summary_to_json(best.estimates);
  j["prs_vs_baseline"] = report.prs_vs_baseline;

  nlohmann::json lines = nlohmann::json::array();
  for (const auto& rl : report.reglines) {
    nlohmann::json l;
    l["cluster_id"] = rl.cluster_id;
    l["alpha_star"] = rl.alpha_star;
    l["beta"] = rl.beta;
    l["member_indices"] = rl.members;
    lines.push_back(std::move(l));
  }
  j["regression_lines"] = std::move(lines);
  return j;
}

void write_outputs(const std::filesystem::path& out_dir,
                   const std::vector<AssetReport>& reports) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json doc;
  doc["assets"] = nlohmann::json::array();
  for (const auto& r : reports) doc["assets"].push_back(report_to_json(r));
  atomic_write(out_dir / "report.json", doc.dump(2) + "\n");

  for (const auto& r : reports) {
    if (!r.ok) continue;
    std::string cand_csv = "candidate_index,structure,s1_members,s3_members,score\n";
    for (std::size_t i = 0; i < r.selection.all.size(); ++i) {
      const auto& cs = r.selection.all[i];
      char score_buf[32];
      std::snprintf(score_buf, sizeof score_buf, "%.17g", cs.score);
      cand_csv += std::to_string(i) + "," + structure_name(cs.candidate.structure) +
                  "," + join(one_based(cs.candidate.s1), ';') + "," +
                  join(one_based(cs.candidate.s3), ';') + "," + score_buf + "\n";
    }
    atomic_write(out_dir / ("candidates_" + r.asset_id + ".csv"), cand_csv);

    std::string line_csv = "cluster_id,alpha_star,beta,member_indices\n";
    for (const auto& rl : r.reglines) {
      char a_buf[32], b_buf[32];
      std::snprintf(a_buf, sizeof a_buf, "%.17g", rl.alpha_star);
      std::snprintf(b_buf, sizeof b_buf, "%.17g", rl.beta);
      line_csv += std::to_string(rl.cluster_id) + "," + a_buf + "," + b_buf +
                  "," + join(rl.members, ';') + "\n";
    }
    atomic_write(out_dir / ("reglines_" + r.asset_id + ".csv"), line_csv);
  }
}

}  // namespace capm
