#pragma once

#include <string>

#include <Eigen/Dense>

namespace feasible {

enum class OptimizerKind {
  sgd,
  sgd_momentum,
  adamw,  // adaptive moments with decoupled weight decay
};

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::sgd;
  double weight_decay = 0.0;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Stateful first-order update on a flat parameter vector. The step size is
/// passed per call so schedules live with the caller.
class PrimalOptimizer {
 public:
  PrimalOptimizer(OptimizerSettings settings, Eigen::Index size);

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double step_size);

  const OptimizerSettings& settings() const { return settings_; }
  long steps() const { return steps_; }

 private:
  OptimizerSettings settings_;
  Eigen::VectorXd first_moment_;
  Eigen::VectorXd second_moment_;
  long steps_ = 0;
};

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);

}  // namespace feasible
