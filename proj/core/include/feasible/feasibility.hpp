#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "feasible/models.hpp"

namespace feasible {

/// Per-sample constraint levels eps. Always stored per sample; a scalar
/// level is broadcast on construction.
struct ConstraintSpec {
  Eigen::VectorXd epsilon;

  static ConstraintSpec uniform(double level, Eigen::Index n);
  static ConstraintSpec per_sample(Eigen::VectorXd levels);

  Eigen::Index size() const { return epsilon.size(); }
  /// Levels for the given sample ids, in order.
  Eigen::VectorXd slice(const std::vector<int>& ids) const;
};

inline constexpr double kNoResilience = std::numeric_limits<double>::infinity();

/// alpha = +inf is plain feasible learning: the dual decay term vanishes.
struct ResilienceConfig {
  double alpha = kNoResilience;

  static ResilienceConfig feasible() { return {}; }
  static ResilienceConfig resilient(double alpha);
  bool is_resilient() const { return alpha < kNoResilience; }
};

/// One nonnegative multiplier per training sample, starting at zero.
struct MultiplierState {
  Eigen::VectorXd lambda;
  std::vector<long> last_update_epoch;  // -1 until the sample is first seen

  static MultiplierState zeros(Eigen::Index n);
  Eigen::Index size() const { return lambda.size(); }
};

/// Slacks implied by the multipliers, u = lambda / alpha. Never optimized
/// directly.
struct SlackView {
  Eigen::VectorXd u;
};

/// g - eps.
Eigen::VectorXd violations(const LossVector& losses, const Eigen::VectorXd& epsilon);

/// [lambda + step (v - lambda/alpha)]_+; alpha = +inf drops the decay term.
/// Throws NumericError naming the first non-finite entry.
Eigen::VectorXd dual_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& violation,
                          double step, double alpha);

/// [lambda + step v]_+
Eigen::VectorXd dual_step_fl(const Eigen::VectorXd& lambda, const Eigen::VectorXd& violation,
                             double step);

/// [lambda + step (v - lambda/alpha)]_+
Eigen::VectorXd dual_step_rfl(const Eigen::VectorXd& lambda, const Eigen::VectorXd& violation,
                              double step, double alpha);

/// lambda . (g - eps)
double lagrangian_fl(const LossVector& losses, const Eigen::VectorXd& epsilon,
                     const Eigen::VectorXd& lambda);

/// lambda . (g - eps) - |lambda|^2 / (2 alpha)
double lagrangian_alpha(const LossVector& losses, const Eigen::VectorXd& epsilon,
                        const Eigen::VectorXd& lambda, double alpha);

/// (alpha/2)|u|^2 + lambda . (g - eps - u), the Lagrangian with explicit slacks.
double lagrangian_rfl(const LossVector& losses, const Eigen::VectorXd& epsilon,
                      const Eigen::VectorXd& slack, const Eigen::VectorXd& lambda, double alpha);

/// Unique maximizer of lagrangian_alpha over lambda >= 0: alpha [g - eps]_+.
Eigen::VectorXd analytic_dual_opt(const LossVector& losses, const Eigen::VectorXd& epsilon,
                                  double alpha);

SlackView slack_view(const Eigen::VectorXd& lambda, double alpha);

/// (alpha/2) |[g - eps]_+|^2
double cserm_objective(const LossVector& losses, const Eigen::VectorXd& epsilon, double alpha);

}  // namespace feasible
