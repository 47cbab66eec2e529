#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "feasible/data.hpp"
#include "feasible/feasibility.hpp"
#include "feasible/models.hpp"

// Independent checks used to validate the main implementation: central
// finite differences, exhaustive grid feasibility, and the slack-elimination
// and clamped-squared identities evaluated through separate routes.

namespace feasible {

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Central differences, one coordinate at a time. Throws NumericError when
/// f is not finite at a probe point.
Eigen::VectorXd finite_diff_grad(const ScalarFunction& f, const Eigen::VectorXd& theta,
                                 double h = 1e-6);

/// max_i |a_i - b_i| / max(|a|_inf, |b|_inf); `coordinate` is the argmax.
struct RelativeError {
  double value = 0.0;
  Eigen::Index coordinate = -1;
};
RelativeError relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

enum class ModelFamily { linear, polynomial, mlp_regression, mlp_classification };
std::vector<ModelFamily> all_model_families();
std::string to_string(ModelFamily family);

/// A small random (model, data, loss) instance of the given family.
struct OracleProblem {
  ModelParams model;
  Dataset data;
  LossKind loss = LossKind::squared_error;
};
OracleProblem random_problem(ModelFamily family, std::uint64_t seed);

struct Prop2Report {
  int trials = 0;
  double tol = 0.0;
  double max_discrepancy = 0.0;
  std::vector<double> discrepancies;  // per trial
  std::vector<int> failed_trials;
  bool passed = true;
};

/// |lagrangian_alpha(g, eps, lambda*, alpha) - cserm_objective(g, eps, alpha)|
/// over random (theta, data, eps, alpha) draws.
Prop2Report check_prop2(ModelFamily family, int n_trials, double tol, std::uint64_t seed);

struct Prop1Report {
  int checks = 0;
  double tol = 0.0;
  /// Most negative L(u') - L(u*) over all perturbations (>= -tol passes).
  double worst_inner_gap = 0.0;
  /// |L(u*, lambda) - lagrangian_alpha(lambda)|.
  double saddle_discrepancy = 0.0;
  /// |min-max - max-min| at the analytic saddle.
  double duality_gap = 0.0;
  bool passed = true;
};

/// Slack elimination for fixed (g, eps, alpha, lambda): u* = lambda/alpha
/// against random u' >= 0 and a per-coordinate grid on [0, 1] step 0.01.
Prop1Report check_prop1_inner(const LossVector& losses, const Eigen::VectorXd& epsilon,
                              double alpha, const Eigen::VectorXd& lambda, int n_perturbations,
                              double tol, std::uint64_t seed);

/// check_prop1_inner over random instances, merged.
Prop1Report check_prop1_trials(int n_trials, double tol, std::uint64_t seed);

using GradientFunction = std::function<Eigen::VectorXd(
    const ModelParams&, LossKind, const Eigen::MatrixXd&, const Eigen::VectorXd&,
    const Eigen::VectorXd&)>;

struct GradientCheckReport {
  ModelFamily family = ModelFamily::linear;
  int draws = 0;
  double tol = 0.0;
  double max_weighted_error = 0.0;  // weighted_loss_grad vs finite differences
  double max_cserm_error = 0.0;     // clamped-squared gradients vs finite differences
  int worst_draw = -1;
  Eigen::Index worst_coordinate = -1;
  std::string worst_check;
  bool passed = true;
};

/// Analytic gradients vs central differences on random draws. `gradient`
/// replaces weighted_loss_grad (fault injection in tests).
GradientCheckReport check_gradients(ModelFamily family, int draws, double tol,
                                    std::uint64_t seed, GradientFunction gradient = {});

enum class TinyFamily {
  constant,   // h(x) = c
  linear_1d,  // h(x) = w x + b, scalar input
};

struct Grid {
  double lo = -5.0;
  double hi = 5.0;
  int points = 1001;

  double spacing() const { return points > 1 ? (hi - lo) / (points - 1) : 0.0; }
};

struct BruteForceResult {
  bool feasible = false;
  Eigen::VectorXd witness;             // best grid point
  double min_max_violation = 0.0;      // min over grid of max_i (g_i - eps_i)
  double grid_spacing = 0.0;
};

/// Exhaustive search over a 1- or 2-parameter family with squared error.
BruteForceResult brute_force_feasible(const Dataset& dataset, const ConstraintSpec& spec,
                                      TinyFamily family, Grid grid, double tol = 1e-9);

std::string to_json(const Prop2Report& report);
std::string to_json(const Prop1Report& report);
std::string to_json(const GradientCheckReport& report);

}  // namespace feasible
