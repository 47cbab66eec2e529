#include "feasible/run_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "feasible/error.hpp"
#include "feasible/metrics.hpp"
#include "text_util.hpp"

namespace feasible {

using detail::format_double;
using Json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// NaN and inf are not JSON numbers.
Json number(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

const EpochMetrics& last_metrics(const RunRecord& record) {
  return record.trajectory.empty() ? record.initial : record.trajectory.back();
}

std::string quantile_key(const std::string& prefix, double q) {
  return prefix + "_cvar_" + format_double(q);
}

}  // namespace

void write_id_value_csv(const std::filesystem::path& path, const std::string& value_name,
                        const std::vector<int>& ids, const Eigen::VectorXd& values) {
  if (static_cast<Eigen::Index>(ids.size()) != values.size())
    throw ShapeError("write_id_value_csv: ids and values differ in length");
  std::vector<std::pair<int, double>> rows;
  for (std::size_t i = 0; i < ids.size(); ++i)
    rows.emplace_back(ids[i], values(static_cast<Eigen::Index>(i)));
  std::sort(rows.begin(), rows.end());
  auto out = open_out(path);
  out << "id," << value_name << '\n';
  for (const auto& [id, value] : rows) out << id << ',' << format_double(value) << '\n';
}

Eigen::VectorXd read_id_value_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || detail::split(detail::trim(line), ',').size() != 2 ||
      detail::trim(line).substr(0, 3) != "id,")
    throw ConfigError("'" + path.string() + "': expected an 'id,<value>' header");
  std::vector<double> values;
  std::vector<bool> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto parts = detail::split(detail::trim(line), ',');
    auto id = parts.size() == 2 ? detail::parse_int(parts[0]) : std::nullopt;
    auto value = parts.size() == 2 ? detail::parse_double(parts[1]) : std::nullopt;
    if (!id || !value || *id < 0)
      throw ConfigError("'" + path.string() + "': malformed row", line_no);
    const auto i = static_cast<std::size_t>(*id);
    if (i >= values.size()) {
      values.resize(i + 1, 0.0);
      seen.resize(i + 1, false);
    }
    if (seen[i]) throw ConfigError("'" + path.string() + "': duplicate id", line_no);
    seen[i] = true;
    values[i] = *value;
  }
  for (bool s : seen)
    if (!s) throw ConfigError("'" + path.string() + "': ids are not 0..n-1");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_trajectory_csv(const std::filesystem::path& path, const RunRecord& record) {
  auto out = open_out(path);
  out << "epoch,train_mean_loss,train_max_loss,train_accuracy,train_satisfied_fraction,"
         "test_mean_loss,test_max_loss,test_accuracy,test_satisfied_fraction,"
         "lambda_min,lambda_mean,lambda_max,lambda_fraction_zero\n";
  auto row = [&](const EpochMetrics& m) {
    const double fields[] = {m.train_mean_loss, m.train_max_loss, m.train_accuracy,
                             m.train_satisfied_fraction, m.test_mean_loss, m.test_max_loss,
                             m.test_accuracy, m.test_satisfied_fraction, m.lambda_min,
                             m.lambda_mean, m.lambda_max, m.lambda_fraction_zero};
    out << m.epoch;
    for (double f : fields) out << ',' << format_double(f);
    out << '\n';
  };
  row(record.initial);
  for (const auto& m : record.trajectory) row(m);
}

std::map<std::string, double> final_metrics(const RunRecord& record, const RunContext& context,
                                            const Dataset& train, const Dataset& test) {
  std::map<std::string, double> out;
  const auto& m = last_metrics(record);
  auto put = [&](const std::string& key, double value) {
    if (std::isfinite(value)) out[key] = value;
  };
  put("train_mean_loss", m.train_mean_loss);
  put("train_max_loss", m.train_max_loss);
  put("train_accuracy", m.train_accuracy);
  put("train_satisfied_fraction", m.train_satisfied_fraction);
  put("test_mean_loss", m.test_mean_loss);
  put("test_max_loss", m.test_max_loss);
  put("test_accuracy", m.test_accuracy);
  put("test_satisfied_fraction", m.test_satisfied_fraction);
  put("lambda_max", m.lambda_max);
  put("lambda_mean", m.lambda_mean);
  put("lambda_fraction_zero", m.lambda_fraction_zero);
  for (double q : context.quantiles) {
    if (record.final_train_losses.size() > 0)
      put(quantile_key("train", q), cvar(record.final_train_losses, q));
    if (record.final_test_losses.size() > 0)
      put(quantile_key("test", q), cvar(record.final_test_losses, q));
  }
  const bool has_multipliers =
      record.config.method == Method::fl || record.config.method == Method::rfl;
  if (has_multipliers && train.task == Task::classification &&
      record.final_train_outputs.rows() == train.size() && train.size() > 1) {
    const auto margins = classification_margins(record.final_train_outputs, train.targets);
    Eigen::VectorXd lambda_by_row(train.size());
    for (Eigen::Index r = 0; r < train.size(); ++r)
      lambda_by_row(r) = record.multipliers.lambda(train.ids[static_cast<std::size_t>(r)]);
    const auto c = margin_multiplier_correlation(lambda_by_row, margins);
    put("margin_multiplier_spearman", c.value);
  }
  (void)test;
  return out;
}

void write_run_directory(const std::filesystem::path& dir, const RunRecord& record,
                         const RunContext& context, const Dataset& train, const Dataset& test) {
  std::filesystem::create_directories(dir);
  const auto& tc = record.config;

  Json config;
  config["name"] = context.name;
  config["method"] = to_string(tc.method);
  config["seed"] = context.seed;
  config["data_seed"] = context.data_seed;
  config["dataset_signature"] = context.dataset_signature;
  config["train_size"] = train.size();
  config["test_size"] = test.size();
  config["task"] = to_string(train.task);
  Json echo = Json::object();
  for (const auto& [key, value] : context.config) echo[key] = value;
  config["config"] = echo;
  Json trainer;
  trainer["method"] = to_string(tc.method);
  trainer["loss"] = to_string(tc.loss);
  trainer["primal_step"] = tc.primal_step;
  trainer["dual_step"] = tc.dual_step;
  trainer["alpha"] = std::isfinite(tc.alpha) ? Json(tc.alpha) : Json("inf");
  trainer["epsilon"] = tc.epsilon;
  trainer["batch_size"] = tc.effective_batch_size(train.size());
  trainer["epochs"] = tc.epochs;
  trainer["cosine_decay"] = tc.cosine_decay;
  trainer["dual_update"] =
      tc.dual_update == DualUpdate::best_response ? "best_response" : "projected_ascent";
  trainer["feasibility_tol"] = tc.feasibility_tol;
  trainer["blowup_threshold"] = tc.blowup_threshold;
  trainer["solver"] = context.solver;
  config["trainer"] = trainer;
  Json meta;
  meta["model"] = record.model.shape.describe();
  meta["parameters"] = record.model.size();
  if (record.model.shape.architecture == Architecture::mlp && record.model.shape.layers.size() > 2)
    meta["activation"] = "relu";
  meta["init"] = context.model_init;
  Json opt;
  opt["kind"] = to_string(tc.optimizer.kind);
  opt["weight_decay"] = tc.optimizer.weight_decay;
  if (tc.optimizer.kind == OptimizerKind::sgd_momentum) opt["momentum"] = tc.optimizer.momentum;
  if (tc.optimizer.kind == OptimizerKind::adamw) {
    opt["beta1"] = tc.optimizer.beta1;
    opt["beta2"] = tc.optimizer.beta2;
    opt["epsilon"] = tc.optimizer.epsilon;
  }
  meta["optimizer"] = opt;
  meta["quantile"] = "order statistic max(1, ceil(q n)), 1-based";
  meta["cvar"] = "mean of losses strictly above the quantile, max when none";
  meta["precision"] = "float64";
  config["metadata"] = meta;
  open_out(dir / "config.json") << config.dump(2) << '\n';

  write_trajectory_csv(dir / "trajectory.csv", record);
  const bool have_final = record.final_train_losses.size() == train.size();
  write_id_value_csv(dir / "final_losses_train.csv", "loss",
                     have_final ? train.ids : std::vector<int>{},
                     have_final ? record.final_train_losses : Eigen::VectorXd());
  const bool have_test = record.final_test_losses.size() == test.size();
  write_id_value_csv(dir / "final_losses_test.csv", "loss",
                     have_test ? test.ids : std::vector<int>{},
                     have_test ? record.final_test_losses : Eigen::VectorXd());
  std::vector<int> all_ids(static_cast<std::size_t>(record.multipliers.size()));
  for (std::size_t i = 0; i < all_ids.size(); ++i) all_ids[i] = static_cast<int>(i);
  write_id_value_csv(dir / "multipliers.csv", "lambda", all_ids, record.multipliers.lambda);
  save_checkpoint(record.model, dir / "checkpoint.bin");

  Json metrics;
  metrics["dataset_signature"] = context.dataset_signature;
  metrics["status"] = record.status == RunStatus::completed ? "completed" : "aborted";
  metrics["epochs_completed"] = record.trajectory.size();
  metrics["steps"] = record.steps;
  metrics["wall_seconds"] = record.wall_seconds;
  Json fin = Json::object();
  for (const auto& [key, value] : final_metrics(record, context, train, test)) fin[key] = value;
  metrics["final"] = fin;
  if (have_final && train.size() > 0) {
    const auto eps = tc.epsilon.size() == 1
                         ? ConstraintSpec::uniform(tc.epsilon[0], train.size())
                         : ConstraintSpec::per_sample(Eigen::Map<const Eigen::VectorXd>(
                               tc.epsilon.data(), static_cast<Eigen::Index>(tc.epsilon.size())));
    LossVector by_id(train.size());
    for (Eigen::Index r = 0; r < train.size(); ++r)
      by_id(train.ids[static_cast<std::size_t>(r)]) = record.final_train_losses(r);
    const auto report = feasibility_report(by_id, eps, tc.feasibility_tol);
    Json feas;
    feas["satisfied_count"] = report.satisfied_count;
    feas["max_violation"] = number(std::max(report.max_violation, 0.0));
    feas["violating_ids"] = report.violating_ids;
    metrics["train_feasibility"] = feas;
  }
  if (record.multipliers.size() > 0) {
    const auto k = std::min<Eigen::Index>(context.top_k, record.multipliers.size());
    const auto stats = multiplier_stats(record.multipliers.lambda, k);
    Json ms;
    ms["fraction_zero"] = stats.fraction_zero;
    ms["fraction_positive"] = stats.fraction_positive;
    ms["top_k_ids"] = stats.top_k_ids;
    Json deciles = Json::array();
    for (double p : stats.percentiles) deciles.push_back(number(p));
    ms["deciles"] = deciles;
    metrics["multipliers"] = ms;
  }
  open_out(dir / "metrics.json") << metrics.dump(2) << '\n';

  auto status = open_out(dir / "status.txt");
  if (record.status == RunStatus::completed) {
    status << "completed\n";
  } else {
    status << "aborted: " << record.abort_reason << '\n';
    if (!record.offending_ids.empty()) {
      status << "offending_ids:";
      for (int id : record.offending_ids) status << ' ' << id;
      status << '\n';
    }
  }
}

StoredRun read_run_directory(const std::filesystem::path& dir) {
  StoredRun run;
  run.dir = dir;
  Json config;
  Json metrics;
  try {
    config = Json::parse(read_text(dir / "config.json"));
    metrics = Json::parse(read_text(dir / "metrics.json"));
    run.name = config.at("name").get<std::string>();
    run.method = config.at("method").get<std::string>();
    run.seed = config.at("seed").get<std::uint64_t>();
    run.dataset_signature = config.at("dataset_signature").get<std::string>();
    const auto& fin = metrics.at("final");
    if (fin.contains("train_accuracy")) run.train_accuracy = fin["train_accuracy"].get<double>();
    if (fin.contains("test_accuracy")) run.test_accuracy = fin["test_accuracy"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + dir.string() + "' is not a run directory: " + e.what());
  }
  std::istringstream status(read_text(dir / "status.txt"));
  std::getline(status, run.status);
  run.train_losses = read_id_value_csv(dir / "final_losses_train.csv");
  run.test_losses = read_id_value_csv(dir / "final_losses_test.csv");
  return run;
}

}  // namespace feasible
