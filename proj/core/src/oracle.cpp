#include "feasible/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "feasible/error.hpp"
#include "feasible/rng.hpp"

namespace feasible {

Eigen::VectorXd finite_diff_grad(const ScalarFunction& f, const Eigen::VectorXd& theta, double h) {
  if (!(h > 0.0)) throw ParameterError("finite_diff_grad: h must be > 0");
  Eigen::VectorXd grad(theta.size());
  Eigen::VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe(i) = theta(i) + h;
    const double up = f(probe);
    probe(i) = theta(i) - h;
    const double down = f(probe);
    probe(i) = theta(i);
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("finite_diff_grad: non-finite value at coordinate " + std::to_string(i),
                         i);
    grad(i) = (up - down) / (2.0 * h);
  }
  return grad;
}

RelativeError relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  if (analytic.size() != numeric.size()) throw ShapeError("relative_error: length mismatch");
  RelativeError out;
  if (analytic.size() == 0) return out;
  const double scale =
      std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-12});
  const double worst = (analytic - numeric).cwiseAbs().maxCoeff(&out.coordinate);
  out.value = worst / scale;
  return out;
}

std::vector<ModelFamily> all_model_families() {
  return {ModelFamily::linear, ModelFamily::polynomial, ModelFamily::mlp_regression,
          ModelFamily::mlp_classification};
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::linear:
      return "linear";
    case ModelFamily::polynomial:
      return "polynomial";
    case ModelFamily::mlp_regression:
      return "mlp_regression";
    case ModelFamily::mlp_classification:
      return "mlp_classification";
  }
  return "?";
}

OracleProblem random_problem(ModelFamily family, std::uint64_t seed) {
  CounterRng rng(seed, streams::kOracle);
  constexpr int kSamples = 6;
  OracleProblem p;
  p.data.task = Task::regression;
  switch (family) {
    case ModelFamily::linear:
      p.model = make_linear(3, 1);
      p.data.features.resize(kSamples, 3);
      break;
    case ModelFamily::polynomial:
      p.model = make_polynomial(5, Basis::chebyshev, Domain{0.0, 1.0});
      p.data.features.resize(kSamples, 1);
      break;
    case ModelFamily::mlp_regression:
      p.model = make_mlp({3, 8, 8, 1});
      p.data.features.resize(kSamples, 3);
      break;
    case ModelFamily::mlp_classification:
      p.model = make_mlp({2, 8, 3});
      p.data.features.resize(kSamples, 2);
      p.data.task = Task::classification;
      p.data.num_classes = 3;
      p.loss = LossKind::cross_entropy;
      break;
  }
  if (p.model.shape.architecture == Architecture::mlp && p.model.shape.layers.size() > 2) {
    init_fan_in_uniform(p.model, seed);
  } else {
    for (Eigen::Index k = 0; k < p.model.size(); ++k) p.model.theta(k) = 0.5 * rng.normal();
  }
  for (Eigen::Index i = 0; i < p.data.features.size(); ++i)
    p.data.features.data()[i] =
        family == ModelFamily::polynomial ? rng.uniform() : rng.normal();
  p.data.targets.resize(kSamples);
  for (Eigen::Index i = 0; i < kSamples; ++i)
    p.data.targets(i) = p.data.task == Task::classification
                            ? static_cast<double>(rng.below(3))
                            : rng.normal();
  p.data.ids.resize(kSamples);
  for (int i = 0; i < kSamples; ++i) p.data.ids[static_cast<std::size_t>(i)] = i;
  return p;
}

Prop2Report check_prop2(ModelFamily family, int n_trials, double tol, std::uint64_t seed) {
  if (!(tol > 0.0)) throw ParameterError("check_prop2: tol must be > 0");
  Prop2Report report;
  report.tol = tol;
  for (int t = 0; t < n_trials; ++t) {
    const auto trial_seed = derive_key(seed, static_cast<std::uint64_t>(t));
    const auto problem = random_problem(family, trial_seed);
    CounterRng rng(trial_seed, streams::kOracle + 1);
    const LossVector g =
        per_sample_loss(problem.loss, forward(problem.model, problem.data.features),
                        problem.data.targets);
    // Levels straddle the losses so both clamp branches are exercised.
    Eigen::VectorXd eps(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) eps(i) = rng.uniform(0.0, 1.2 * g.maxCoeff());
    const double alpha = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const auto lambda_star = analytic_dual_opt(g, eps, alpha);
    const double lhs = lagrangian_alpha(g, eps, lambda_star, alpha);
    const double rhs = cserm_objective(g, eps, alpha);
    const double gap = std::abs(lhs - rhs);
    report.discrepancies.push_back(gap);
    report.max_discrepancy = std::max(report.max_discrepancy, gap);
    if (!(gap <= tol)) {
      report.failed_trials.push_back(t);
      report.passed = false;
    }
    ++report.trials;
  }
  return report;
}

Prop1Report check_prop1_inner(const LossVector& losses, const Eigen::VectorXd& epsilon,
                              double alpha, const Eigen::VectorXd& lambda, int n_perturbations,
                              double tol, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw ParameterError("check_prop1_inner: alpha must be > 0");
  Prop1Report report;
  report.tol = tol;
  const Eigen::VectorXd u_star = slack_view(lambda, alpha).u;
  const double at_star = lagrangian_rfl(losses, epsilon, u_star, lambda, alpha);
  auto record = [&](const Eigen::VectorXd& u) {
    const double gap = lagrangian_rfl(losses, epsilon, u, lambda, alpha) - at_star;
    report.worst_inner_gap = std::min(report.worst_inner_gap, gap);
    ++report.checks;
  };
  CounterRng rng(seed, streams::kOracle + 2);
  for (int p = 0; p < n_perturbations; ++p) {
    Eigen::VectorXd u(u_star.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.uniform(0.0, 2.0 * (u_star(i) + 0.5));
    record(u);
  }
  for (Eigen::Index i = 0; i < u_star.size(); ++i) {
    Eigen::VectorXd u = u_star;
    for (int k = 0; k <= 100; ++k) {
      u(i) = 0.01 * k;
      record(u);
    }
  }
  report.saddle_discrepancy = std::abs(at_star - lagrangian_alpha(losses, epsilon, lambda, alpha));

  // min over u of max over lambda: the inner max is finite only for
  // u >= g - eps, so the smallest such u gives (alpha/2)|[g - eps]_+|^2.
  const Eigen::VectorXd u_min = (losses - epsilon).cwiseMax(0.0);
  const double min_max = 0.5 * alpha * u_min.squaredNorm();
  // max over lambda of min over u, at lambda* with its slack lambda*/alpha.
  const Eigen::VectorXd lambda_star = analytic_dual_opt(losses, epsilon, alpha);
  const double max_min =
      lagrangian_rfl(losses, epsilon, slack_view(lambda_star, alpha).u, lambda_star, alpha);
  report.duality_gap = std::abs(min_max - max_min);

  report.passed = report.worst_inner_gap >= -tol && report.saddle_discrepancy <= tol &&
                  report.duality_gap <= tol;
  return report;
}

Prop1Report check_prop1_trials(int n_trials, double tol, std::uint64_t seed) {
  Prop1Report merged;
  merged.tol = tol;
  for (int t = 0; t < n_trials; ++t) {
    const auto trial_seed = derive_key(seed, static_cast<std::uint64_t>(t));
    CounterRng rng(trial_seed, streams::kOracle + 3);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(8));
    Eigen::VectorXd g(n);
    Eigen::VectorXd eps(n);
    Eigen::VectorXd lambda(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      g(i) = rng.uniform(0.0, 2.0);
      eps(i) = rng.uniform(0.0, 1.0);
      lambda(i) = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 2.0);
    }
    const double alpha = std::pow(10.0, rng.uniform(-1.0, 1.0));
    const auto r = check_prop1_inner(g, eps, alpha, lambda, 50, tol, trial_seed);
    merged.checks += r.checks;
    merged.worst_inner_gap = std::min(merged.worst_inner_gap, r.worst_inner_gap);
    merged.saddle_discrepancy = std::max(merged.saddle_discrepancy, r.saddle_discrepancy);
    merged.duality_gap = std::max(merged.duality_gap, r.duality_gap);
    merged.passed = merged.passed && r.passed;
  }
  return merged;
}

GradientCheckReport check_gradients(ModelFamily family, int draws, double tol,
                                    std::uint64_t seed, GradientFunction gradient) {
  if (!gradient) {
    gradient = [](const ModelParams& m, LossKind k, const Eigen::MatrixXd& x,
                  const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
      return weighted_loss_grad(m, k, x, y, w);
    };
  }
  GradientCheckReport report;
  report.family = family;
  report.tol = tol;
  double worst = -1.0;
  auto note = [&](const RelativeError& e, int draw, const char* which, double& slot) {
    slot = std::max(slot, e.value);
    if (e.value > worst) {
      worst = e.value;
      report.worst_draw = draw;
      report.worst_coordinate = e.coordinate;
      report.worst_check = which;
    }
  };
  for (int d = 0; d < draws; ++d) {
    const auto draw_seed = derive_key(seed, static_cast<std::uint64_t>(d));
    auto problem = random_problem(family, draw_seed);
    CounterRng rng(draw_seed, streams::kOracle + 4);
    const auto& x = problem.data.features;
    const auto& y = problem.data.targets;
    const auto kind = problem.loss;

    Eigen::VectorXd weights(x.rows());
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights(i) = rng.uniform(0.0, 2.0);
    auto weighted = [&](const Eigen::VectorXd& theta) {
      ModelParams m{problem.model.shape, theta};
      return weighted_loss(m, kind, x, y, weights);
    };
    const auto numeric = finite_diff_grad(weighted, problem.model.theta);
    note(relative_error(gradient(problem.model, kind, x, y, weights), numeric), d, "weighted",
         report.max_weighted_error);

    // Clamped-squared objective: levels at the median loss so half of the
    // samples are active and none sits on the kink.
    const LossVector g = per_sample_loss(kind, forward(problem.model, x), y);
    std::vector<double> sorted(g.data(), g.data() + g.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median =
        sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    const Eigen::VectorXd eps = Eigen::VectorXd::Constant(g.size(), median);
    const double alpha = rng.uniform(0.5, 2.0);
    auto clamped = [&](const Eigen::VectorXd& theta) {
      ModelParams m{problem.model.shape, theta};
      return cserm_objective(per_sample_loss(kind, forward(m, x), y), eps, alpha);
    };
    const auto numeric_cserm = finite_diff_grad(clamped, problem.model.theta);
    const auto envelope = gradient(problem.model, kind, x, y, analytic_dual_opt(g, eps, alpha));
    note(relative_error(envelope, numeric_cserm), d, "cserm_envelope", report.max_cserm_error);
    const auto pass = forward_cached(problem.model, x);
    const auto direct =
        backward(problem.model, pass, clamped_squared_output_grad(kind, pass.output, y, eps, alpha));
    note(relative_error(direct, numeric_cserm), d, "cserm_direct", report.max_cserm_error);
    ++report.draws;
  }
  report.passed = report.max_weighted_error < tol && report.max_cserm_error < tol;
  return report;
}

BruteForceResult brute_force_feasible(const Dataset& dataset, const ConstraintSpec& spec,
                                      TinyFamily family, Grid grid, double tol) {
  if (dataset.task != Task::regression)
    throw ParameterError("brute_force_feasible: squared-error regression only");
  if (grid.points < 1) throw ParameterError("brute_force_feasible: grid needs >= 1 point");
  if (spec.size() != dataset.size()) throw ShapeError("brute_force_feasible: spec length");
  ModelParams model = family == TinyFamily::constant ? make_polynomial(0, Basis::monomial)
                                                     : make_linear(1, 1);
  const Eigen::MatrixXd features =
      family == TinyFamily::constant ? Eigen::MatrixXd::Zero(dataset.size(), 1) : dataset.features;
  if (features.cols() != 1) throw ShapeError("brute_force_feasible: linear_1d needs 1 feature");

  BruteForceResult result;
  result.grid_spacing = grid.spacing();
  result.min_max_violation = std::numeric_limits<double>::infinity();
  auto value_at = [&](int k) { return grid.lo + k * grid.spacing(); };
  auto consider = [&](const Eigen::VectorXd& theta) {
    model.theta = theta;
    const auto g = per_sample_loss(LossKind::squared_error, forward(model, features), dataset.targets);
    const double worst = (g - spec.epsilon).maxCoeff();
    if (worst < result.min_max_violation) {
      result.min_max_violation = worst;
      result.witness = theta;
    }
  };
  if (family == TinyFamily::constant) {
    for (int k = 0; k < grid.points; ++k) consider(Eigen::VectorXd::Constant(1, value_at(k)));
  } else {
    for (int a = 0; a < grid.points; ++a)
      for (int b = 0; b < grid.points; ++b) {
        Eigen::VectorXd theta(2);
        theta << value_at(a), value_at(b);
        consider(theta);
      }
  }
  result.feasible = result.min_max_violation <= tol;
  return result;
}

std::string to_json(const Prop2Report& report) {
  nlohmann::json j;
  j["check"] = "clamped_squared_identity";
  j["trials"] = report.trials;
  j["tol"] = report.tol;
  j["max_discrepancy"] = report.max_discrepancy;
  j["per_trial_discrepancy"] = report.discrepancies;
  j["failed_trials"] = report.failed_trials;
  j["passed"] = report.passed;
  return j.dump(2);
}

std::string to_json(const Prop1Report& report) {
  nlohmann::json j;
  j["check"] = "slack_elimination";
  j["checks"] = report.checks;
  j["tol"] = report.tol;
  j["worst_inner_gap"] = report.worst_inner_gap;
  j["saddle_discrepancy"] = report.saddle_discrepancy;
  j["duality_gap"] = report.duality_gap;
  j["passed"] = report.passed;
  return j.dump(2);
}

std::string to_json(const GradientCheckReport& report) {
  nlohmann::json j;
  j["check"] = "gradients";
  j["family"] = to_string(report.family);
  j["draws"] = report.draws;
  j["tol"] = report.tol;
  j["max_weighted_error"] = report.max_weighted_error;
  j["max_cserm_error"] = report.max_cserm_error;
  j["worst_draw"] = report.worst_draw;
  j["worst_coordinate"] = report.worst_coordinate;
  j["worst_check"] = report.worst_check;
  j["passed"] = report.passed;
  return j.dump(2);
}

}  // namespace feasible
