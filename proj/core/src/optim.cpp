#include "feasible/optim.hpp"

#include <cmath>

#include "feasible/error.hpp"

namespace feasible {

PrimalOptimizer::PrimalOptimizer(OptimizerSettings settings, Eigen::Index size)
    : settings_(settings),
      first_moment_(Eigen::VectorXd::Zero(size)),
      second_moment_(settings.kind == OptimizerKind::adamw ? Eigen::VectorXd::Zero(size)
                                                           : Eigen::VectorXd()) {}

void PrimalOptimizer::step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad,
                           double step_size) {
  if (grad.size() != theta.size() || theta.size() != first_moment_.size())
    throw ShapeError("optimizer: gradient size mismatch");
  ++steps_;
  switch (settings_.kind) {
    case OptimizerKind::sgd:
      if (settings_.weight_decay != 0.0)
        theta -= step_size * (grad + settings_.weight_decay * theta);
      else
        theta -= step_size * grad;
      break;
    case OptimizerKind::sgd_momentum: {
      // Heavy ball, first step initializes the buffer with the gradient.
      Eigen::VectorXd g = grad;
      if (settings_.weight_decay != 0.0) g += settings_.weight_decay * theta;
      if (steps_ == 1)
        first_moment_ = g;
      else
        first_moment_ = settings_.momentum * first_moment_ + g;
      theta -= step_size * first_moment_;
      break;
    }
    case OptimizerKind::adamw: {
      const double b1 = settings_.beta1;
      const double b2 = settings_.beta2;
      if (settings_.weight_decay != 0.0) theta *= 1.0 - step_size * settings_.weight_decay;
      first_moment_ = b1 * first_moment_ + (1.0 - b1) * grad;
      second_moment_ = b2 * second_moment_ + (1.0 - b2) * grad.cwiseAbs2();
      const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
      const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
      theta.array() -= step_size * (first_moment_.array() / correction1) /
                       ((second_moment_.array() / correction2).sqrt() + settings_.epsilon);
      break;
    }
  }
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd:
      return "sgd";
    case OptimizerKind::sgd_momentum:
      return "sgd_momentum";
    case OptimizerKind::adamw:
      return "adamw";
  }
  return "?";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "sgd_momentum") return OptimizerKind::sgd_momentum;
  if (name == "adamw" || name == "adaptive_moments_decoupled_decay") return OptimizerKind::adamw;
  throw ParameterError("unknown optimizer '" + name + "'");
}

}  // namespace feasible
