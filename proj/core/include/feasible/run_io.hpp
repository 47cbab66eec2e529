#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "feasible/data.hpp"
#include "feasible/trainer.hpp"

namespace feasible {

/// Facts about a run that are not part of the RunRecord itself.
struct RunContext {
  std::string name;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;
  std::string dataset_signature;
  std::string model_init = "fan_in_uniform";
  std::string solver = "gradient";
  std::vector<double> quantiles{0.5, 0.9, 0.95, 0.99};
  int top_k = 10;
  std::map<std::string, std::string> config;  // key = value echo
};

/// Writes config.json, trajectory.csv, final_losses_{train,test}.csv,
/// multipliers.csv, checkpoint.bin (+ .shape), metrics.json and status.txt.
void write_run_directory(const std::filesystem::path& dir, const RunRecord& record,
                         const RunContext& context, const Dataset& train, const Dataset& test);

/// One row per epoch, epoch 0 being the initial state. Wall-clock time is
/// deliberately absent so reruns are byte-identical.
void write_trajectory_csv(const std::filesystem::path& path, const RunRecord& record);

/// Scalar end-of-run metrics, keyed by name (also what summary.json
/// aggregates over seeds).
std::map<std::string, double> final_metrics(const RunRecord& record, const RunContext& context,
                                            const Dataset& train, const Dataset& test);

/// What compare needs from a persisted run.
struct StoredRun {
  std::filesystem::path dir;
  std::string name;
  std::string method;
  std::uint64_t seed = 0;
  std::string dataset_signature;
  std::string status;
  LossVector train_losses;
  LossVector test_losses;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
};

StoredRun read_run_directory(const std::filesystem::path& dir);

/// `id,loss` (or `id,lambda`) rows in id order.
void write_id_value_csv(const std::filesystem::path& path, const std::string& value_name,
                        const std::vector<int>& ids, const Eigen::VectorXd& values);
Eigen::VectorXd read_id_value_csv(const std::filesystem::path& path);

}  // namespace feasible
