#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feasible/data.hpp"
#include "feasible/models.hpp"
#include "feasible/oracle.hpp"
#include "feasible/trainer.hpp"

namespace feasible {

enum class Generator { two_moons, noisy_cosine, conflicting_pairs, outlier_regression, csv };

struct DatasetSpec {
  Generator generator = Generator::two_moons;
  int n = 200;
  double noise = 0.1;          // two_moons, outlier_regression
  double sigma = 0.2;          // noisy_cosine
  int pairs = 8;               // conflicting_pairs
  int dims = 2;                // conflicting_pairs, outlier_regression
  double label_gap = 1.0;      // conflicting_pairs
  double outlier_shift = 2.0;  // outlier_regression
  std::filesystem::path path;  // csv
  Task task = Task::regression;  // csv
  std::optional<std::uint64_t> seed;  // unset: the data follow the run seed
  double test_fraction = 0.2;
};

enum class Solver {
  gradient,       // the primal-dual / gradient loop
  least_squares,  // exact minimum-norm fit (erm on models linear in theta)
};

struct ModelSpec {
  std::string architecture = "mlp";  // mlp, linear, polynomial
  std::vector<int> layers;           // mlp; empty: input, 70, 70, output
  int degree = 3;                    // polynomial
  Basis basis = Basis::chebyshev;
  Domain domain{};
  std::string init = "fan_in_uniform";  // or zeros
};

/// One experiment: a dataset recipe, a model, a trainer setup and the seeds
/// to repeat it over.
struct ExperimentConfig {
  std::string name = "experiment";
  DatasetSpec dataset;
  ModelSpec model;
  TrainerConfig trainer;
  bool loss_set = false;  // trainer.loss given explicitly
  Solver solver = Solver::gradient;
  std::vector<double> quantiles{0.5, 0.9, 0.95, 0.99};
  int top_k = 10;
  std::filesystem::path output_dir;
  std::vector<std::uint64_t> seeds{0};
  std::map<std::string, std::string> entries;  // key = value as written
  std::map<std::string, int> lines;            // key -> line, for diagnostics

  /// Throws ConfigError with the offending line.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Everything a single seed needs, built from the config.
struct PreparedRun {
  Dataset train;
  Dataset test;
  ModelParams model;
  TrainerConfig trainer;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;
};

/// Throws ConfigError when the config does not fit the generated data.
PreparedRun prepare_run(const ExperimentConfig& config, std::uint64_t seed);
RunRecord execute_run(const ExperimentConfig& config, const PreparedRun& run);

/// `output.dir`, resolved against $FEASIBLE_OUTPUT_ROOT when that is set and
/// the directory is relative.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

struct ExperimentResult {
  std::filesystem::path root;
  std::vector<std::filesystem::path> run_dirs;
  std::vector<std::uint64_t> aborted_seeds;
};

/// Runs every seed into `<root>/seed_<s>/` and writes `<root>/summary.json`.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

struct CompareOptions {
  std::vector<double> quantiles{0.5, 0.9, 0.95, 0.99};
  std::filesystem::path output_dir = "comparison";
  bool svg = false;
};

struct CompareResult {
  std::vector<std::string> methods;
  std::vector<std::filesystem::path> files;
  std::string table;  // plain-text table, one row per method
};

/// `inputs` are seed directories or experiment directories holding seed_*
/// subdirectories. Throws ConfigError when runs that share a seed were
/// trained on different data.
CompareResult compare(const std::vector<std::filesystem::path>& inputs,
                      const CompareOptions& options);

enum class VerifySuite { props, gradients, all };
VerifySuite parse_verify_suite(const std::string& name);

struct VerifyOptions {
  std::uint64_t seed = 0;
  int prop2_trials = 1000;
  int prop1_trials = 100;
  int gradient_draws = 20;
  double identity_tol = 1e-10;
  double gradient_tol = 1e-5;
  /// Replaces weighted_loss_grad in the gradient suite (fault injection).
  GradientFunction gradient;
};

struct VerifyResult {
  bool passed = true;
  std::string report_json;
  std::vector<std::string> failures;
};

VerifyResult verify(VerifySuite suite, const VerifyOptions& options = {});

std::vector<std::string> config_template_names();
/// Throws ConfigError for an unknown name.
std::string config_template(const std::string& name);

std::string to_string(Generator generator);
std::string to_string(Solver solver);

}  // namespace feasible
