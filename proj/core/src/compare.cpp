#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "feasible/error.hpp"
#include "feasible/experiment.hpp"
#include "feasible/metrics.hpp"
#include "feasible/run_io.hpp"
#include "feasible/svg.hpp"
#include "text_util.hpp"

namespace feasible {

using detail::format_double;
namespace fs = std::filesystem;

namespace {

struct Group {
  std::string label;
  std::vector<StoredRun> runs;  // completed runs only
  std::vector<fs::path> skipped;
};

struct MeanStd {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;
};

MeanStd aggregate(std::vector<double> values) {
  MeanStd out;
  out.values = values;
  if (values.empty()) return out;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  out.mean = mean;
  out.std = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

std::string cell(const MeanStd& m) {
  if (!std::isfinite(m.mean)) return "-";
  std::ostringstream s;
  s << std::setprecision(4) << m.mean << " ± " << m.std;
  return s.str();
}

nlohmann::ordered_json to_json(const MeanStd& m) {
  nlohmann::ordered_json j;
  j["mean"] = std::isfinite(m.mean) ? nlohmann::ordered_json(m.mean) : nullptr;
  j["std"] = std::isfinite(m.std) ? nlohmann::ordered_json(m.std) : nullptr;
  j["values"] = m.values;
  return j;
}

std::vector<fs::path> expand(const fs::path& input) {
  if (fs::exists(input / "config.json")) return {input};
  std::vector<fs::path> dirs;
  if (fs::is_directory(input))
    for (const auto& entry : fs::directory_iterator(input))
      if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0 &&
          fs::exists(entry.path() / "config.json"))
        dirs.push_back(entry.path());
  if (dirs.empty())
    throw ConfigError("'" + input.string() + "' holds neither a run nor seed_* run directories");
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

void write_xy(const fs::path& path, const std::vector<double>& x, const std::vector<double>& y) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "x,y\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << format_double(x[i]) << ',' << format_double(y[i]) << '\n';
}

std::string file_label(std::string label) {
  for (char& c : label)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) c = '_';
  return label;
}

}  // namespace

CompareResult compare(const std::vector<fs::path>& inputs, const CompareOptions& options) {
  if (inputs.empty()) throw ConfigError("compare needs at least one run directory");
  for (double q : options.quantiles)
    if (!(q >= 0.0 && q < 1.0)) throw ConfigError("quantiles must lie in [0, 1)");

  std::vector<Group> groups;
  std::map<std::string, int> label_count;
  std::map<std::uint64_t, std::pair<std::string, fs::path>> seed_signature;
  for (const auto& input : inputs) {
    Group g;
    for (const auto& dir : expand(input)) {
      auto run = read_run_directory(dir);
      auto [it, inserted] =
          seed_signature.try_emplace(run.seed, run.dataset_signature, run.dir);
      if (!inserted && it->second.first != run.dataset_signature)
        throw ConfigError("dataset signature mismatch for seed " + std::to_string(run.seed) +
                          ": '" + run.dir.string() + "' (" + run.dataset_signature + ") vs '" +
                          it->second.second.string() + "' (" + it->second.first + ")");
      if (g.label.empty()) g.label = run.name;
      if (run.status != "completed") {
        g.skipped.push_back(run.dir);
        continue;
      }
      g.runs.push_back(std::move(run));
    }
    if (++label_count[g.label] > 1) g.label += "_" + std::to_string(label_count[g.label]);
    groups.push_back(std::move(g));
  }
  // Groups with no seed in common must still agree on their data.
  std::set<std::string> first_sigs;
  for (const auto& r : groups.front().runs) first_sigs.insert(r.dataset_signature);
  for (std::size_t k = 1; k < groups.size(); ++k)
    for (const auto& r : groups[k].runs)
      if (!first_sigs.empty() && !first_sigs.count(r.dataset_signature) &&
          seed_signature.at(r.seed).second == r.dir)
        throw ConfigError("'" + r.dir.string() + "' was trained on data (" + r.dataset_signature +
                          ") that no run of '" + groups.front().label + "' used");

  fs::create_directories(options.output_dir);
  CompareResult result;
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(i / 100.0);
  for (double q : options.quantiles) grid.push_back(q);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  nlohmann::ordered_json report;
  report["quantile"] = "order statistic max(1, ceil(q n)), 1-based; CVaR strictly above";
  report["aggregation"] = "mean and population std over seeds";
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  std::map<std::string, std::vector<Series>> cdf_series, cvar_series;

  std::ostringstream table;
  std::vector<std::string> header{"method", "seeds", "train avg", "train max", "train acc",
                                  "test avg", "test max", "test acc"};
  for (double q : options.quantiles) header.push_back("test cvar@" + format_double(q));
  std::vector<std::vector<std::string>> rows;

  for (const auto& g : groups) {
    result.methods.push_back(g.label);
    nlohmann::ordered_json jm;
    jm["method"] = g.label;
    jm["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : g.runs) jm["runs"].push_back(r.dir.string());
    jm["skipped_aborted"] = nlohmann::ordered_json::array();
    for (const auto& p : g.skipped) jm["skipped_aborted"].push_back(p.string());
    std::vector<std::string> row{g.label, std::to_string(g.runs.size())};
    std::map<std::string, MeanStd> test_cvar;
    for (const std::string split : {"train", "test"}) {
      std::vector<double> means, maxes, accs, pooled;
      std::vector<std::vector<double>> cvars(options.quantiles.size());
      std::vector<double> curve(grid.size(), 0.0);
      int used = 0;
      for (const auto& r : g.runs) {
        const auto& losses = split == "train" ? r.train_losses : r.test_losses;
        if (losses.size() == 0) continue;
        ++used;
        means.push_back(losses.mean());
        maxes.push_back(losses.maxCoeff());
        const auto& acc = split == "train" ? r.train_accuracy : r.test_accuracy;
        if (acc) accs.push_back(*acc);
        pooled.insert(pooled.end(), losses.data(), losses.data() + losses.size());
        for (std::size_t k = 0; k < options.quantiles.size(); ++k)
          cvars[k].push_back(cvar(losses, options.quantiles[k]));
        for (std::size_t k = 0; k < grid.size(); ++k) curve[k] += cvar(losses, grid[k]);
      }
      nlohmann::ordered_json js;
      js["mean_loss"] = to_json(aggregate(means));
      js["max_loss"] = to_json(aggregate(maxes));
      js["accuracy"] = to_json(aggregate(accs));
      nlohmann::ordered_json jc = nlohmann::ordered_json::object();
      for (std::size_t k = 0; k < options.quantiles.size(); ++k) {
        const auto a = aggregate(cvars[k]);
        jc[format_double(options.quantiles[k])] = to_json(a);
        if (split == "test") test_cvar[format_double(options.quantiles[k])] = a;
      }
      js["cvar"] = jc;
      jm[split] = js;
      row.push_back(cell(aggregate(means)));
      row.push_back(cell(aggregate(maxes)));
      row.push_back(cell(aggregate(accs)));
      if (used == 0) continue;

      const LossVector all = Eigen::Map<LossVector>(pooled.data(), static_cast<Eigen::Index>(pooled.size()));
      std::vector<double> cx, cy;
      for (const auto& p : empirical_cdf(all)) {
        cx.push_back(p.value);
        cy.push_back(p.fraction);
      }
      for (double& v : curve) v /= used;
      const auto stem = file_label(g.label) + "_" + split + ".csv";
      write_xy(options.output_dir / ("cdf_" + stem), cx, cy);
      write_xy(options.output_dir / ("cvar_" + stem), grid, curve);
      result.files.push_back(options.output_dir / ("cdf_" + stem));
      result.files.push_back(options.output_dir / ("cvar_" + stem));
      cdf_series[split].push_back({g.label, cx, cy});
      cvar_series[split].push_back({g.label, grid, curve});
    }
    for (double q : options.quantiles) row.push_back(cell(test_cvar[format_double(q)]));
    rows.push_back(row);
    methods.push_back(jm);
  }
  report["methods"] = methods;

  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;  // count code points
    return n;
  };
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = measure(header[j]);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], measure(r[j]));
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      table << r[j] << std::string(width[j] - measure(r[j]) + (j + 1 < r.size() ? 2 : 0), ' ');
    }
    table << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  result.table = table.str();

  std::ofstream(options.output_dir / "table.txt", std::ios::binary | std::ios::trunc)
      << result.table;
  std::ofstream(options.output_dir / "comparison.json", std::ios::binary | std::ios::trunc)
      << report.dump(2) << '\n';
  result.files.push_back(options.output_dir / "table.txt");
  result.files.push_back(options.output_dir / "comparison.json");

  if (options.svg) {
    for (const auto& [split, series] : cdf_series) {
      const auto path = options.output_dir / ("cdf_" + split + ".svg");
      write_line_chart(path, "Loss CDF (" + split + ")", "loss", "fraction", series);
      result.files.push_back(path);
    }
    for (const auto& [split, series] : cvar_series) {
      const auto path = options.output_dir / ("cvar_" + split + ".svg");
      write_line_chart(path, "CVaR (" + split + ")", "quantile q", "mean loss above q",
                       series);
      result.files.push_back(path);
    }
  }
  return result;
}

}  // namespace feasible
