#include "feasible/feasibility.hpp"

#include <cmath>
#include <string>

#include "feasible/error.hpp"

namespace feasible {

namespace {

void require_same_length(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": length mismatch");
}

void require_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0)) throw ParameterError(std::string(what) + ": alpha must be > 0");
}

}  // namespace

ConstraintSpec ConstraintSpec::uniform(double level, Eigen::Index n) {
  if (!(level >= 0.0)) throw ParameterError("constraint level must be >= 0");
  return {Eigen::VectorXd::Constant(n, level)};
}

ConstraintSpec ConstraintSpec::per_sample(Eigen::VectorXd levels) {
  if ((levels.array() < 0.0).any() || !levels.allFinite())
    throw ParameterError("constraint levels must be finite and >= 0");
  return {std::move(levels)};
}

Eigen::VectorXd ConstraintSpec::slice(const std::vector<int>& ids) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) out(static_cast<Eigen::Index>(k)) = epsilon(ids[k]);
  return out;
}

ResilienceConfig ResilienceConfig::resilient(double alpha) {
  require_alpha(alpha, "resilience");
  return {alpha};
}

MultiplierState MultiplierState::zeros(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), std::vector<long>(static_cast<std::size_t>(n), -1)};
}

Eigen::VectorXd violations(const LossVector& losses, const Eigen::VectorXd& epsilon) {
  require_same_length(losses.size(), epsilon.size(), "violations");
  return losses - epsilon;
}

Eigen::VectorXd dual_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& violation,
                          double step, double alpha) {
  require_same_length(lambda.size(), violation.size(), "dual_step");
  if (!(step > 0.0)) throw ParameterError("dual_step: step size must be > 0");
  require_alpha(alpha, "dual_step");
  Eigen::VectorXd next(lambda.size());
  const bool decay = alpha < kNoResilience;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    double ascent = violation(i);
    if (decay) ascent -= lambda(i) / alpha;
    const double candidate = lambda(i) + step * ascent;
    if (!std::isfinite(candidate))
      throw NumericError("dual_step: non-finite multiplier at position " + std::to_string(i), i);
    next(i) = std::max(0.0, candidate);
  }
  return next;
}

Eigen::VectorXd dual_step_fl(const Eigen::VectorXd& lambda, const Eigen::VectorXd& violation,
                             double step) {
  return dual_step(lambda, violation, step, kNoResilience);
}

Eigen::VectorXd dual_step_rfl(const Eigen::VectorXd& lambda, const Eigen::VectorXd& violation,
                              double step, double alpha) {
  require_alpha(alpha, "dual_step_rfl");
  return dual_step(lambda, violation, step, alpha);
}

double lagrangian_fl(const LossVector& losses, const Eigen::VectorXd& epsilon,
                     const Eigen::VectorXd& lambda) {
  require_same_length(lambda.size(), losses.size(), "lagrangian_fl");
  return lambda.dot(violations(losses, epsilon));
}

double lagrangian_alpha(const LossVector& losses, const Eigen::VectorXd& epsilon,
                        const Eigen::VectorXd& lambda, double alpha) {
  require_alpha(alpha, "lagrangian_alpha");
  return lagrangian_fl(losses, epsilon, lambda) - lambda.squaredNorm() / (2.0 * alpha);
}

double lagrangian_rfl(const LossVector& losses, const Eigen::VectorXd& epsilon,
                      const Eigen::VectorXd& slack, const Eigen::VectorXd& lambda, double alpha) {
  require_alpha(alpha, "lagrangian_rfl");
  require_same_length(slack.size(), losses.size(), "lagrangian_rfl");
  require_same_length(lambda.size(), losses.size(), "lagrangian_rfl");
  return 0.5 * alpha * slack.squaredNorm() + lambda.dot(violations(losses, epsilon) - slack);
}

Eigen::VectorXd analytic_dual_opt(const LossVector& losses, const Eigen::VectorXd& epsilon,
                                  double alpha) {
  require_alpha(alpha, "analytic_dual_opt");
  return alpha * violations(losses, epsilon).cwiseMax(0.0);
}

SlackView slack_view(const Eigen::VectorXd& lambda, double alpha) {
  require_alpha(alpha, "slack_view");
  if ((lambda.array() < 0.0).any()) throw ParameterError("slack_view: lambda must be >= 0");
  return {lambda / alpha};
}

double cserm_objective(const LossVector& losses, const Eigen::VectorXd& epsilon, double alpha) {
  require_alpha(alpha, "cserm_objective");
  return 0.5 * alpha * violations(losses, epsilon).cwiseMax(0.0).squaredNorm();
}

}  // namespace feasible
