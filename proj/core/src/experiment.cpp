#include "feasible/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>
#include <ostream>

#include <json.hpp>

#include "feasible/config_file.hpp"
#include "feasible/error.hpp"
#include "feasible/rng.hpp"
#include "feasible/run_io.hpp"
#include "text_util.hpp"

namespace feasible {

std::string to_string(Generator generator) {
  switch (generator) {
    case Generator::two_moons:
      return "two_moons";
    case Generator::noisy_cosine:
      return "noisy_cosine";
    case Generator::conflicting_pairs:
      return "conflicting_pairs";
    case Generator::outlier_regression:
      return "outlier_regression";
    case Generator::csv:
      return "csv";
  }
  return "?";
}

std::string to_string(Solver solver) {
  return solver == Solver::least_squares ? "least_squares" : "gradient";
}

namespace {

template <typename Enum>
Enum choose(const KeyValueFile& file, const std::string& key, Enum fallback,
            const std::vector<std::pair<std::string, Enum>>& options) {
  auto value = file.get_string(key);
  if (!value) return fallback;
  std::string allowed;
  for (const auto& [name, e] : options) {
    if (*value == name) return e;
    allowed += (allowed.empty() ? "" : ", ") + name;
  }
  throw ConfigError("'" + key + "' must be one of " + allowed + ", got '" + *value + "'",
                    file.line(key));
}

int to_int(const KeyValueFile& file, const std::string& key, long long value) {
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max())
    throw ConfigError("'" + key + "' is out of range", file.line(key));
  return static_cast<int>(value);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  const auto file = KeyValueFile::parse(text);
  ExperimentConfig c;
  auto fail = [&](const std::string& key, const std::string& message) -> ConfigError {
    return ConfigError(message, file.line(key));
  };
  for (const auto& [key, entry] : file.entries()) {
    c.entries[key] = entry.value;
    c.lines[key] = entry.line;
  }

  c.name = file.get_string("name", c.name);
  for (long long s : file.get_int_list("seeds", {0})) {
    if (s < 0) throw fail("seeds", "seeds must be >= 0");
    c.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  c.seeds.erase(c.seeds.begin());  // drop the default placeholder
  if (c.seeds.empty()) throw fail("seeds", "seeds must not be empty");

  auto& d = c.dataset;
  if (!file.has("dataset.generator")) throw ConfigError("missing required key 'dataset.generator'");
  d.generator = choose<Generator>(file, "dataset.generator", d.generator,
                                  {{"two_moons", Generator::two_moons},
                                   {"noisy_cosine", Generator::noisy_cosine},
                                   {"conflicting_pairs", Generator::conflicting_pairs},
                                   {"outlier_regression", Generator::outlier_regression},
                                   {"csv", Generator::csv}});
  d.n = to_int(file, "dataset.n", file.get_int("dataset.n", d.n));
  d.noise = file.get_double("dataset.noise", d.noise);
  d.sigma = file.get_double("dataset.sigma", d.sigma);
  d.pairs = to_int(file, "dataset.pairs", file.get_int("dataset.pairs", d.pairs));
  d.dims = to_int(file, "dataset.dims", file.get_int("dataset.dims", d.dims));
  d.label_gap = file.get_double("dataset.label_gap", d.label_gap);
  d.outlier_shift = file.get_double("dataset.outlier_shift", d.outlier_shift);
  d.path = file.get_string("dataset.path", "");
  d.task = choose<Task>(file, "dataset.task", d.task,
                        {{"regression", Task::regression},
                         {"classification", Task::classification}});
  if (file.has("dataset.seed")) {
    const auto s = file.get_int("dataset.seed", 0);
    if (s < 0) throw fail("dataset.seed", "dataset.seed must be >= 0");
    d.seed = static_cast<std::uint64_t>(s);
  }
  if (d.generator == Generator::csv && d.path.empty())
    throw fail("dataset.generator", "the csv generator needs dataset.path");
  d.test_fraction = file.get_double("split.test_fraction", d.test_fraction);
  if (!(d.test_fraction >= 0.0 && d.test_fraction < 1.0))
    throw fail("split.test_fraction", "split.test_fraction must be in [0, 1)");

  auto& m = c.model;
  m.architecture = file.get_string("model.architecture", m.architecture);
  if (m.architecture != "mlp" && m.architecture != "linear" && m.architecture != "polynomial")
    throw fail("model.architecture", "model.architecture must be mlp, linear or polynomial");
  for (long long w : file.get_int_list("model.layers", {})) {
    if (w < 1) throw fail("model.layers", "layer widths must be >= 1");
    m.layers.push_back(to_int(file, "model.layers", w));
  }
  if (m.architecture == "mlp" && file.has("model.layers") && m.layers.size() < 2)
    throw fail("model.layers", "model.layers needs at least an input and an output width");
  m.degree = to_int(file, "model.degree", file.get_int("model.degree", m.degree));
  if (m.degree < 0) throw fail("model.degree", "model.degree must be >= 0");
  m.basis = choose<Basis>(file, "model.basis", m.basis,
                          {{"chebyshev", Basis::chebyshev}, {"monomial", Basis::monomial}});
  const auto domain = file.get_double_list("model.domain", {m.domain.lo, m.domain.hi});
  if (domain.size() != 2 || !(domain[0] < domain[1]))
    throw fail("model.domain", "model.domain must be two increasing numbers 'lo, hi'");
  m.domain = Domain{domain[0], domain[1]};
  m.init = file.get_string("model.init", m.init);
  if (m.init != "fan_in_uniform" && m.init != "zeros")
    throw fail("model.init", "model.init must be fan_in_uniform or zeros");

  auto& t = c.trainer;
  if (!file.has("trainer.method")) throw ConfigError("missing required key 'trainer.method'");
  t.method = choose<Method>(file, "trainer.method", t.method,
                            {{"erm", Method::erm}, {"fl", Method::fl}, {"rfl", Method::rfl},
                             {"cserm", Method::cserm}});
  c.loss_set = file.has("trainer.loss");
  t.loss = choose<LossKind>(file, "trainer.loss", t.loss,
                            {{"squared_error", LossKind::squared_error},
                             {"cross_entropy", LossKind::cross_entropy}});
  t.primal_step = file.get_double("trainer.primal_step", t.primal_step);
  if (!(t.primal_step > 0.0)) throw fail("trainer.primal_step", "trainer.primal_step must be > 0");
  t.dual_step = file.get_double("trainer.dual_step", t.dual_step);
  if (!(t.dual_step > 0.0)) throw fail("trainer.dual_step", "trainer.dual_step must be > 0");
  t.alpha = file.get_double("trainer.alpha", t.alpha);
  if (t.method == Method::fl && std::isfinite(t.alpha))
    throw fail("trainer.alpha", "fl takes no alpha (it is the alpha = inf case); use rfl");
  if ((t.method == Method::rfl || t.method == Method::cserm) &&
      !(t.alpha > 0.0 && std::isfinite(t.alpha)))
    throw ConfigError("rfl and cserm need a finite trainer.alpha > 0",
                      file.has("trainer.alpha") ? file.line("trainer.alpha")
                                                : file.line("trainer.method"));
  t.epsilon = file.get_double_list("trainer.epsilon", t.epsilon);
  if (t.epsilon.empty()) throw fail("trainer.epsilon", "trainer.epsilon must not be empty");
  for (double e : t.epsilon)
    if (!(e >= 0.0 && std::isfinite(e)))
      throw fail("trainer.epsilon", "trainer.epsilon entries must be finite and >= 0");
  const auto batch = file.get_int("trainer.batch_size", 0);
  if (batch < 0) throw fail("trainer.batch_size", "trainer.batch_size must be >= 0 (0 = full)");
  t.batch_size = static_cast<Eigen::Index>(batch);
  t.epochs = to_int(file, "trainer.epochs", file.get_int("trainer.epochs", t.epochs));
  if (t.epochs < 0) throw fail("trainer.epochs", "trainer.epochs must be >= 0");
  if (auto kind = file.get_string("trainer.optimizer")) {
    try {
      t.optimizer.kind = parse_optimizer_kind(*kind);
    } catch (const ParameterError& e) {
      throw fail("trainer.optimizer", e.what());
    }
  }
  t.optimizer.weight_decay = file.get_double("trainer.weight_decay", t.optimizer.weight_decay);
  t.optimizer.momentum = file.get_double("trainer.momentum", t.optimizer.momentum);
  t.optimizer.beta1 = file.get_double("trainer.beta1", t.optimizer.beta1);
  t.optimizer.beta2 = file.get_double("trainer.beta2", t.optimizer.beta2);
  t.optimizer.epsilon = file.get_double("trainer.adam_epsilon", t.optimizer.epsilon);
  if (!(t.optimizer.weight_decay >= 0.0))
    throw fail("trainer.weight_decay", "trainer.weight_decay must be >= 0");
  if (!(t.optimizer.momentum >= 0.0 && t.optimizer.momentum < 1.0))
    throw fail("trainer.momentum", "trainer.momentum must be in [0, 1)");
  if (!(t.optimizer.beta1 >= 0.0 && t.optimizer.beta1 < 1.0))
    throw fail("trainer.beta1", "trainer.beta1 must be in [0, 1)");
  if (!(t.optimizer.beta2 >= 0.0 && t.optimizer.beta2 < 1.0))
    throw fail("trainer.beta2", "trainer.beta2 must be in [0, 1)");
  if (!(t.optimizer.epsilon > 0.0))
    throw fail("trainer.adam_epsilon", "trainer.adam_epsilon must be > 0");
  t.cosine_decay = file.get_bool("trainer.cosine_decay", t.cosine_decay);
  t.dual_update = choose<DualUpdate>(file, "trainer.dual_update", t.dual_update,
                                     {{"projected_ascent", DualUpdate::projected_ascent},
                                      {"best_response", DualUpdate::best_response}});
  if (t.dual_update == DualUpdate::best_response && t.method != Method::rfl)
    throw fail("trainer.dual_update", "best_response multipliers only exist for rfl");
  t.feasibility_tol = file.get_double("trainer.feasibility_tol", t.feasibility_tol);
  if (!(t.feasibility_tol >= 0.0))
    throw fail("trainer.feasibility_tol", "trainer.feasibility_tol must be >= 0");
  t.blowup_threshold = file.get_double("trainer.blowup_threshold", t.blowup_threshold);
  if (!(t.blowup_threshold > 0.0))
    throw fail("trainer.blowup_threshold", "trainer.blowup_threshold must be > 0");
  c.solver = choose<Solver>(file, "trainer.solver", c.solver,
                            {{"gradient", Solver::gradient},
                             {"least_squares", Solver::least_squares}});
  if (c.solver == Solver::least_squares) {
    if (t.method != Method::erm)
      throw fail("trainer.solver", "the least_squares solver only fits erm");
    if (file.has("trainer.epochs") && t.epochs != 0)
      throw fail("trainer.epochs", "the least_squares solver runs no epochs; set 0 or omit");
    t.epochs = 0;
  }

  c.quantiles = file.get_double_list("metrics.quantiles", c.quantiles);
  for (double q : c.quantiles)
    if (!(q >= 0.0 && q < 1.0)) throw fail("metrics.quantiles", "quantiles must lie in [0, 1)");
  c.top_k = to_int(file, "metrics.top_k", file.get_int("metrics.top_k", c.top_k));
  if (c.top_k < 0) throw fail("metrics.top_k", "metrics.top_k must be >= 0");
  c.output_dir = file.get_string("output.dir", "runs/" + c.name);
  file.reject_unused();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  auto config = parse(text.str());
  if (config.dataset.generator == Generator::csv && config.dataset.path.is_relative())
    config.dataset.path = path.parent_path() / config.dataset.path;
  return config;
}

namespace {

int line_of(const ExperimentConfig& c, const std::string& key, const std::string& fallback = "") {
  if (auto it = c.lines.find(key); it != c.lines.end()) return it->second;
  if (!fallback.empty())
    if (auto it = c.lines.find(fallback); it != c.lines.end()) return it->second;
  return 0;
}

Dataset generate(const ExperimentConfig& c, std::uint64_t data_seed) {
  const auto& d = c.dataset;
  switch (d.generator) {
    case Generator::two_moons:
      return gen_two_moons(d.n, d.noise, data_seed);
    case Generator::noisy_cosine:
      return gen_noisy_cosine(d.n, d.sigma, data_seed);
    case Generator::conflicting_pairs:
      return gen_conflicting_pairs(d.pairs, d.dims, d.label_gap, data_seed);
    case Generator::outlier_regression:
      return gen_outlier_regression(d.n, d.dims, d.outlier_shift, d.noise, data_seed);
    case Generator::csv:
      return read_dataset_csv(d.path, d.task);
  }
  throw ConfigError("unknown generator");
}

}  // namespace

PreparedRun prepare_run(const ExperimentConfig& c, std::uint64_t seed) {
  PreparedRun run;
  run.seed = seed;
  run.data_seed = c.dataset.seed.value_or(seed);
  Dataset full;
  try {
    full = generate(c, run.data_seed);
    full.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("dataset: ") + e.what(), line_of(c, "dataset.generator"));
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("dataset: ") + e.what(), line_of(c, "dataset.path"));
  }
  if (c.dataset.test_fraction > 0.0) {
    std::tie(run.train, run.test) = train_test_split(full, c.dataset.test_fraction, run.data_seed);
  } else {
    run.train = full;
    run.test = full.subset(std::vector<int>{});
  }
  if (run.train.size() < 1)
    throw ConfigError("the training split is empty", line_of(c, "split.test_fraction"));

  const int outputs = run.train.task == Task::classification ? run.train.num_classes : 1;
  const auto& m = c.model;
  if (m.architecture == "mlp") {
    std::vector<int> layers = m.layers;
    if (layers.empty()) layers = {static_cast<int>(run.train.dims()), 70, 70, outputs};
    if (layers.front() != run.train.dims() || layers.back() != outputs)
      throw ConfigError("model.layers must start at the feature width (" +
                            std::to_string(run.train.dims()) + ") and end at " +
                            std::to_string(outputs),
                        line_of(c, "model.layers", "model.architecture"));
    run.model = make_mlp(layers);
  } else if (m.architecture == "linear") {
    run.model = make_linear(static_cast<int>(run.train.dims()), outputs);
  } else {
    if (run.train.dims() != 1 || run.train.task != Task::regression)
      throw ConfigError("polynomial models need one feature and a regression task",
                        line_of(c, "model.architecture"));
    run.model = make_polynomial(m.degree, m.basis, m.domain);
  }
  if (m.init == "fan_in_uniform") init_fan_in_uniform(run.model, seed);

  run.trainer = c.trainer;
  run.trainer.seed = seed;
  if (!c.loss_set)
    run.trainer.loss = run.train.task == Task::classification ? LossKind::cross_entropy
                                                              : LossKind::squared_error;
  if (c.solver == Solver::least_squares && m.architecture == "mlp" &&
      run.model.shape.layers.size() != 2)
    throw ConfigError("the least_squares solver needs a model that is linear in its parameters",
                      line_of(c, "trainer.solver"));
  if (c.solver == Solver::least_squares && outputs != 1)
    throw ConfigError("the least_squares solver needs a single-output regression model",
                      line_of(c, "trainer.solver"));
  try {
    run.trainer.validate(run.train);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), line_of(c, "trainer.method"));
  }
  return run;
}

RunRecord execute_run(const ExperimentConfig& c, const PreparedRun& run) {
  if (c.solver == Solver::least_squares)
    return train(run.trainer, solve_least_squares(run.model, run.train), run.train, run.test);
  return train(run.trainer, run.model, run.train, run.test);
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& c) {
  const char* root = std::getenv("FEASIBLE_OUTPUT_ROOT");
  if (root && *root && c.output_dir.is_relative()) return std::filesystem::path(root) / c.output_dir;
  return c.output_dir;
}

ExperimentResult run_experiment(const ExperimentConfig& c, std::ostream* log) {
  ExperimentResult result;
  result.root = resolve_output_dir(c);
  std::filesystem::create_directories(result.root);
  std::map<std::string, std::vector<double>> per_metric;
  std::vector<std::uint64_t> completed;
  for (auto seed : c.seeds) {
    const auto run = prepare_run(c, seed);
    const auto record = execute_run(c, run);
    RunContext context;
    context.name = c.name;
    context.seed = seed;
    context.data_seed = run.data_seed;
    context.dataset_signature = dataset_signature(run.train) + "-" + dataset_signature(run.test);
    context.model_init = c.model.init;
    context.solver = to_string(c.solver);
    context.quantiles = c.quantiles;
    context.top_k = c.top_k;
    context.config = c.entries;
    const auto dir = result.root / ("seed_" + std::to_string(seed));
    write_run_directory(dir, record, context, run.train, run.test);
    result.run_dirs.push_back(dir);
    if (record.status == RunStatus::aborted) {
      result.aborted_seeds.push_back(seed);
      if (log) *log << c.name << " seed " << seed << ": aborted (" << record.abort_reason << ")\n";
      continue;
    }
    completed.push_back(seed);
    for (const auto& [key, value] : final_metrics(record, context, run.train, run.test))
      per_metric[key].push_back(value);
    if (log) {
      const auto& last = record.trajectory.empty() ? record.initial : record.trajectory.back();
      *log << c.name << " seed " << seed << ": train mean " << last.train_mean_loss << ", max "
           << last.train_max_loss << ", satisfied " << last.train_satisfied_fraction << " ("
           << record.wall_seconds << " s)\n";
    }
  }

  nlohmann::ordered_json summary;
  summary["name"] = c.name;
  summary["method"] = to_string(c.trainer.method);
  summary["seeds"] = c.seeds;
  summary["completed_seeds"] = completed;
  summary["aborted_seeds"] = result.aborted_seeds;
  summary["aggregation"] = "mean and population std over completed seeds";
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [key, values] : per_metric) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    metrics[key] = {{"mean", mean}, {"std", std::sqrt(var)}, {"values", values}};
  }
  summary["metrics"] = metrics;
  std::ofstream out(result.root / "summary.json", std::ios::binary | std::ios::trunc);
  out << summary.dump(2) << '\n';
  return result;
}

VerifySuite parse_verify_suite(const std::string& name) {
  if (name == "props") return VerifySuite::props;
  if (name == "gradients") return VerifySuite::gradients;
  if (name == "all") return VerifySuite::all;
  throw ConfigError("unknown verify suite '" + name + "' (props, gradients, all)");
}

VerifyResult verify(VerifySuite suite, const VerifyOptions& options) {
  VerifyResult result;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  const auto families = all_model_families();
  if (suite == VerifySuite::props || suite == VerifySuite::all) {
    const int per_family = std::max(1, options.prop2_trials / static_cast<int>(families.size()));
    for (std::size_t f = 0; f < families.size(); ++f) {
      const auto report = check_prop2(families[f], per_family, options.identity_tol,
                                      derive_key(options.seed, 100 + f));
      auto j = nlohmann::ordered_json::parse(to_json(report));
      j["family"] = to_string(families[f]);
      checks.push_back(j);
      if (!report.passed) {
        result.passed = false;
        result.failures.push_back("props/identity/" + to_string(families[f]) + ": " +
                                  std::to_string(report.failed_trials.size()) +
                                  " trials above tol, max discrepancy " +
                                  detail::format_double(report.max_discrepancy));
      }
    }
    const auto p1 = check_prop1_trials(options.prop1_trials, options.identity_tol,
                                       derive_key(options.seed, 200));
    checks.push_back(nlohmann::ordered_json::parse(to_json(p1)));
    if (!p1.passed) {
      result.passed = false;
      result.failures.push_back(
          "props/slack: inner gap " + detail::format_double(p1.worst_inner_gap) + ", saddle " +
          detail::format_double(p1.saddle_discrepancy) + ", duality gap " +
          detail::format_double(p1.duality_gap));
    }
  }
  if (suite == VerifySuite::gradients || suite == VerifySuite::all) {
    for (std::size_t f = 0; f < families.size(); ++f) {
      const auto report = check_gradients(families[f], options.gradient_draws,
                                          options.gradient_tol, derive_key(options.seed, 300 + f),
                                          options.gradient);
      checks.push_back(nlohmann::ordered_json::parse(to_json(report)));
      if (!report.passed) {
        result.passed = false;
        result.failures.push_back(
            "gradients/" + to_string(families[f]) + ": " + report.worst_check +
            " relative error " +
            detail::format_double(std::max(report.max_weighted_error, report.max_cserm_error)) +
            " at draw " + std::to_string(report.worst_draw) + ", coordinate " +
            std::to_string(report.worst_coordinate));
      }
    }
  }
  nlohmann::ordered_json out;
  out["suite"] = suite == VerifySuite::props ? "props"
                 : suite == VerifySuite::gradients ? "gradients"
                                                   : "all";
  out["passed"] = result.passed;
  out["failures"] = result.failures;
  out["checks"] = checks;
  result.report_json = out.dump(2);
  return result;
}

namespace {

struct Template {
  const char* name;
  const char* text;
};

constexpr Template kTemplates[] = {
    {"two_moons_fl", R"(# Two moons, feasible learning. MLP 2-70-70-2, AdamW 5e-4, dual step 1e-2,
# batch 512, 250 epochs. epsilon = -ln(0.9): every training point must get
# probability >= 0.9 on its label. 1250 points, 1000 used for training.
name = two_moons_fl
seeds = 0, 1, 2, 3, 4
dataset.generator = two_moons
dataset.n = 1250
dataset.noise = 0.1
split.test_fraction = 0.2
model.architecture = mlp
model.layers = 2, 70, 70, 2
model.init = fan_in_uniform
trainer.method = fl
trainer.loss = cross_entropy
trainer.optimizer = adamw
trainer.primal_step = 5e-4
trainer.dual_step = 1e-2
trainer.epsilon = 0.10536051565782628
trainer.batch_size = 512
trainer.epochs = 250
metrics.quantiles = 0.5, 0.9, 0.95, 0.99
metrics.top_k = 10
output.dir = runs/two_moons_fl
)"},
    {"two_moons_erm", R"(# Two moons, plain average-loss training with the same network and budget.
name = two_moons_erm
seeds = 0, 1, 2, 3, 4
dataset.generator = two_moons
dataset.n = 1250
dataset.noise = 0.1
split.test_fraction = 0.2
model.architecture = mlp
model.layers = 2, 70, 70, 2
model.init = fan_in_uniform
trainer.method = erm
trainer.loss = cross_entropy
trainer.optimizer = adamw
trainer.primal_step = 5e-4
trainer.batch_size = 512
trainer.epochs = 250
trainer.epsilon = 0.10536051565782628
metrics.quantiles = 0.5, 0.9, 0.95, 0.99
output.dir = runs/two_moons_erm
)"},
    {"two_moons_rfl", R"(# Two moons, resilient feasible learning (alpha = 1).
name = two_moons_rfl
seeds = 0, 1, 2, 3, 4
dataset.generator = two_moons
dataset.n = 1250
dataset.noise = 0.1
split.test_fraction = 0.2
model.architecture = mlp
model.layers = 2, 70, 70, 2
model.init = fan_in_uniform
trainer.method = rfl
trainer.alpha = 1.0
trainer.loss = cross_entropy
trainer.optimizer = adamw
trainer.primal_step = 5e-4
trainer.dual_step = 1e-2
trainer.epsilon = 0.10536051565782628
trainer.batch_size = 512
trainer.epochs = 250
metrics.quantiles = 0.5, 0.9, 0.95, 0.99
output.dir = runs/two_moons_rfl
)"},
    {"poly_fl", R"(# Degree-20 polynomial (Chebyshev basis on [0, 1]) on 20 noisy cosine
# points, sigma = 0.2, squared-error constraints at epsilon = sigma.
# Full-batch primal-dual steps.
name = poly_fl
seeds = 0, 1, 2, 3, 4
dataset.generator = noisy_cosine
dataset.n = 20
dataset.sigma = 0.2
split.test_fraction = 0
model.architecture = polynomial
model.degree = 20
model.basis = chebyshev
model.domain = 0, 1
trainer.method = fl
trainer.optimizer = sgd
trainer.primal_step = 0.01
trainer.dual_step = 0.5
trainer.epsilon = 0.2
trainer.batch_size = 0
trainer.epochs = 50000
output.dir = runs/poly_fl
)"},
    {"poly_erm", R"(# Same polynomial fitted by exact least squares (interpolates the data).
name = poly_erm
seeds = 0, 1, 2, 3, 4
dataset.generator = noisy_cosine
dataset.n = 20
dataset.sigma = 0.2
split.test_fraction = 0
model.architecture = polynomial
model.degree = 20
model.basis = chebyshev
model.domain = 0, 1
trainer.method = erm
trainer.solver = least_squares
trainer.epsilon = 0.2
output.dir = runs/poly_erm
)"},
    {"conflicting_fl", R"(# Eight duplicated inputs with labels 1 apart: no model meets epsilon = 0,
# so plain feasible learning keeps growing its multipliers.
name = conflicting_fl
seeds = 0
dataset.generator = conflicting_pairs
dataset.pairs = 8
dataset.dims = 2
dataset.label_gap = 1.0
split.test_fraction = 0
model.architecture = linear
model.init = zeros
trainer.method = fl
trainer.optimizer = sgd
trainer.primal_step = 1e-4
trainer.dual_step = 1e-2
trainer.epsilon = 0
trainer.epochs = 5000
output.dir = runs/conflicting_fl
)"},
    {"conflicting_rfl", R"(# The same infeasible problem with resilient constraints (alpha = 1).
name = conflicting_rfl
seeds = 0
dataset.generator = conflicting_pairs
dataset.pairs = 8
dataset.dims = 2
dataset.label_gap = 1.0
split.test_fraction = 0
model.architecture = linear
model.init = zeros
trainer.method = rfl
trainer.alpha = 1.0
trainer.optimizer = sgd
trainer.primal_step = 1e-4
trainer.dual_step = 1e-2
trainer.epsilon = 0
trainer.epochs = 5000
output.dir = runs/conflicting_rfl
)"},
    {"outliers_erm", R"(# Linear regression where about 5% of labels are shifted by +2.
name = outliers_erm
seeds = 0, 1, 2, 3, 4
dataset.generator = outlier_regression
dataset.n = 800
dataset.dims = 3
dataset.noise = 0.3
dataset.outlier_shift = 2.0
split.test_fraction = 0.5
model.architecture = linear
model.init = zeros
trainer.method = erm
trainer.optimizer = adamw
trainer.primal_step = 1e-2
trainer.epochs = 3000
trainer.epsilon = 0
metrics.quantiles = 0.5, 0.9, 0.95, 0.99
output.dir = runs/outliers_erm
)"},
    {"outliers_rfl", R"(# The outlier regression with resilient constraints (alpha = 1, epsilon = 0).
name = outliers_rfl
seeds = 0, 1, 2, 3, 4
dataset.generator = outlier_regression
dataset.n = 800
dataset.dims = 3
dataset.noise = 0.3
dataset.outlier_shift = 2.0
split.test_fraction = 0.5
model.architecture = linear
model.init = zeros
trainer.method = rfl
trainer.alpha = 1.0
trainer.optimizer = adamw
trainer.primal_step = 1e-2
trainer.dual_step = 0.1
trainer.epsilon = 0
trainer.epochs = 3000
metrics.quantiles = 0.5, 0.9, 0.95, 0.99
output.dir = runs/outliers_rfl
)"},
};

}  // namespace

std::vector<std::string> config_template_names() {
  std::vector<std::string> names;
  for (const auto& t : kTemplates) names.emplace_back(t.name);
  return names;
}

std::string config_template(const std::string& name) {
  for (const auto& t : kTemplates)
    if (name == t.name) return t.text;
  std::string known;
  for (const auto& t : kTemplates) known += std::string(known.empty() ? "" : ", ") + t.name;
  throw ConfigError("unknown template '" + name + "' (available: " + known + ")");
}

}  // namespace feasible
