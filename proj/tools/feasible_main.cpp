// feasible: run experiments, compare persisted runs, verify the oracles and
// print config templates.
//
// Exit codes: 0 success, 1 other failure, 2 config error, 3 aborted run,
// 4 verification failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "feasible/error.hpp"
#include "feasible/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kAborted = 3;
constexpr int kVerifyFailed = 4;

int cmd_run(const std::string& path, bool quiet) {
  const auto config = feasible::ExperimentConfig::load(path);
  // Fail on a bad dataset/model combination before any run directory appears.
  (void)feasible::prepare_run(config, config.seeds.front());
  const auto result = feasible::run_experiment(config, quiet ? nullptr : &std::cerr);
  std::cout << result.root.string() << '\n';
  if (!result.aborted_seeds.empty()) {
    std::cerr << "aborted seeds:";
    for (auto s : result.aborted_seeds) std::cerr << ' ' << s;
    std::cerr << " (partial artifacts kept in " << result.root.string() << ")\n";
    return kAborted;
  }
  return kOk;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::vector<double>& quantiles,
                const std::string& out, bool svg) {
  feasible::CompareOptions options;
  if (!quantiles.empty()) options.quantiles = quantiles;
  options.output_dir = out;
  options.svg = svg;
  std::vector<std::filesystem::path> inputs(dirs.begin(), dirs.end());
  const auto result = feasible::compare(inputs, options);
  std::cout << result.table;
  std::cerr << "wrote " << result.files.size() << " files to " << options.output_dir.string()
            << '\n';
  return kOk;
}

int cmd_verify(const std::string& suite, feasible::VerifyOptions options,
               const std::string& report_path) {
  const auto result = feasible::verify(feasible::parse_verify_suite(suite), options);
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    out << result.report_json << '\n';
  } else {
    std::cout << result.report_json << '\n';
  }
  for (const auto& f : result.failures) std::cerr << "FAIL " << f << '\n';
  std::cerr << "verify " << suite << ": " << (result.passed ? "pass" : "fail") << '\n';
  return result.passed ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feasible learning experiments: primal-dual training with per-sample loss "
               "constraints"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Train every seed of an experiment config");
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_flag("-q,--quiet", quiet, "No per-seed progress on stderr");

  std::vector<std::string> dirs;
  std::vector<double> quantiles;
  std::string out = "comparison";
  bool svg = false;
  auto* cmp = app.add_subcommand("compare", "Compare persisted runs (CDF/CVaR curves, table)");
  cmp->add_option("dirs", dirs, "Run directories or experiment directories")->required();
  cmp->add_option("--quantiles", quantiles, "CVaR quantiles in [0, 1)");
  cmp->add_option("-o,--out", out, "Output directory")->capture_default_str();
  cmp->add_flag("--svg", svg, "Also render SVG line charts");

  std::string suite;
  feasible::VerifyOptions verify_options;
  std::string report;
  auto* ver = app.add_subcommand("verify", "Run the numerical oracle suites");
  ver->add_option("suite", suite, "props, gradients or all")
      ->required()
      ->check(CLI::IsMember({"props", "gradients", "all"}));
  ver->add_option("--seed", verify_options.seed, "Seed for the random draws")
      ->capture_default_str();
  ver->add_option("--identity-tol", verify_options.identity_tol,
                  "Tolerance for the closed-form identities")
      ->capture_default_str();
  ver->add_option("--gradient-tol", verify_options.gradient_tol,
                  "Relative tolerance for analytic vs finite-difference gradients")
      ->capture_default_str();
  ver->add_option("--report", report, "Write the JSON report here instead of stdout");

  std::string template_name;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-config", "Print a config template");
  gen->add_option("template", template_name,
                  "One of: " + [] {
                    std::string s;
                    for (const auto& n : feasible::config_template_names())
                      s += (s.empty() ? "" : ", ") + n;
                    return s;
                  }())
      ->required();
  gen->add_option("-o,--out", gen_out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, quiet);
    if (*cmp) return cmd_compare(dirs, quantiles, out, svg);
    if (*ver) return cmd_verify(suite, verify_options, report);
    if (*gen) {
      const auto text = feasible::config_template(template_name);
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(gen_out, std::ios::binary | std::ios::trunc) << text;
      }
      return kOk;
    }
  } catch (const feasible::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
