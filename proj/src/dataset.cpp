#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "capm/dataset.hpp"
#include "capm/rng.hpp"

namespace capm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, int row, const std::string& column) {
  const std::string s = trim(raw);
  if (s.empty())
    throw std::runtime_error("row " + std::to_string(row) + ", column " +
                             column + ": empty");
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("row " + std::to_string(row) + ", column " +
                             column + ": not a number: '" + s + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

MarketDataset ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path.string());
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 4 || header[0] != "date" || header[1] != "rf" ||
      header[2] != "market")
    throw std::runtime_error(
        "bad header: expected 'date,rf,market,<asset>...', got '" + line + "'");

  MarketDataset md;
  md.asset_ids.assign(header.begin() + 3, header.end());
  std::vector<double> rf, mkt;
  std::vector<std::vector<double>> assets(md.asset_ids.size());

  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    const std::string date = trim(cells[0]);
    if (date.empty())
      throw std::runtime_error("row " + std::to_string(row) + ", column date: empty");
    if (!md.dates.empty() && date <= md.dates.back())
      throw std::runtime_error("row " + std::to_string(row) +
                               ": date '" + date + "' duplicates or precedes '" +
                               md.dates.back() + "'");
    md.dates.push_back(date);
    rf.push_back(parse_cell(cells[1], row, "rf"));
    mkt.push_back(parse_cell(cells[2], row, "market"));
    for (std::size_t a = 0; a < md.asset_ids.size(); ++a)
      assets[a].push_back(parse_cell(cells[3 + a], row, md.asset_ids[a]));
  }
  if (md.dates.empty()) throw std::runtime_error("no data rows in " + path.string());

  md.risk_free = Eigen::Map<Eigen::VectorXd>(rf.data(), rf.size());
  md.market_return = Eigen::Map<Eigen::VectorXd>(mkt.data(), mkt.size());
  for (auto& col : assets)
    md.assets.emplace_back(Eigen::Map<Eigen::VectorXd>(col.data(), col.size()));
  return md;
}

AssetSeries excess_returns(const MarketDataset& md, const std::string& asset_id) {
  for (int a = 0; a < md.num_assets(); ++a) {
    if (md.asset_ids[a] == asset_id) {
      AssetSeries s;
      s.asset_id = asset_id;
      s.y = md.assets[a] - md.risk_free;
      s.x = md.market_return - md.risk_free;
      s.dates = md.dates;
      return s;
    }
  }
  throw std::invalid_argument("unknown asset: " + asset_id);
}

namespace {

constexpr double kMarketSd = 0.05;
constexpr double kRiskFree = 0.003;

std::string synthetic_date(int t) {
  // monthly labels from 1990-01
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", 1990 + t / 12, 1 + t % 12);
  return buf;
}

}  // namespace

MarketDataset make_synthetic_dataset(int T, double beta, double sigma,
                                     const std::map<int, double>& shifts,
                                     std::uint64_t seed) {
  if (T < 3) throw std::invalid_argument("make_synthetic_dataset: T too small");
  if (!(sigma > 0)) throw std::invalid_argument("make_synthetic_dataset: sigma must be > 0");
  for (const auto& [idx, shift] : shifts)
    if (idx < 1 || idx > T)
      throw std::invalid_argument("make_synthetic_dataset: shift index " +
                                  std::to_string(idx) + " out of 1.." +
                                  std::to_string(T));
  RngState rng(seed);
  MarketDataset md;
  md.risk_free = Eigen::VectorXd::Constant(T, kRiskFree);
  md.market_return.resize(T);
  md.asset_ids = {"SYNTH"};
  Eigen::VectorXd asset(T);
  for (int t = 0; t < T; ++t) {
    md.dates.push_back(synthetic_date(t));
    const double x = sample_normal(rng, 0.0, kMarketSd * kMarketSd);
    double y = beta * x + sample_normal(rng, 0.0, sigma * sigma);
    if (auto it = shifts.find(t + 1); it != shifts.end()) y += it->second;
    md.market_return[t] = kRiskFree + x;
    asset[t] = kRiskFree + y;
  }
  md.assets.push_back(asset);
  return md;
}

void emit_synthetic(int T, double beta, double sigma,
                    const std::map<int, double>& shifts, std::uint64_t seed,
                    const std::filesystem::path& path) {
  const MarketDataset md = make_synthetic_dataset(T, beta, sigma, shifts, seed);
  std::string csv = "date,rf,market,SYNTH\n";
  for (int t = 0; t < md.periods(); ++t) {
    csv += md.dates[t];
    csv += ',';
    csv += format_double(md.risk_free[t]);
    csv += ',';
    csv += format_double(md.market_return[t]);
    csv += ',';
    csv += format_double(md.assets[0][t]);
    csv += '\n';
  }
  atomic_write(path, csv);

  nlohmann::json truth;
  truth["T"] = T;
  truth["true_beta"] = beta;
  truth["sigma"] = sigma;
  truth["seed"] = seed;
  truth["shift_indices"] = nlohmann::json::array();
  truth["shifts"] = nlohmann::json::object();
  for (const auto& [idx, shift] : shifts) {
    truth["shift_indices"].push_back(idx);
    truth["shifts"][std::to_string(idx)] = shift;
  }
  const auto sidecar = path.parent_path() / "synthetic_truth.json";
  atomic_write(sidecar, truth.dump(2) + "\n");
}

}  // namespace capm
