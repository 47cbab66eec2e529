#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "feasible/data.hpp"
#include "feasible/error.hpp"
#include "feasible/feasibility.hpp"
#include "feasible/models.hpp"
#include "feasible/optim.hpp"

namespace feasible {

enum class Method { erm, fl, rfl, cserm };

/// How fl/rfl set the multipliers of a batch before the primal step.
enum class DualUpdate {
  projected_ascent,  // one projected gradient-ascent step (the normal path)
  best_response,     // exact maximizer alpha [g - eps]_+ (rfl only, for checks)
};

struct TrainerConfig {
  Method method = Method::erm;
  LossKind loss = LossKind::squared_error;
  double primal_step = 1e-2;
  double dual_step = 1e-2;
  double alpha = kNoResilience;      // finite for rfl and cserm
  std::vector<double> epsilon{0.0};  // one level (broadcast) or one per training sample
  Eigen::Index batch_size = 0;       // 0 means full batch
  int epochs = 1;
  std::uint64_t seed = 0;
  OptimizerSettings optimizer{};
  bool cosine_decay = false;
  DualUpdate dual_update = DualUpdate::projected_ascent;
  double feasibility_tol = 1e-8;
  double blowup_threshold = 1e12;

  /// Throws ParameterError when the config cannot run on `train`.
  void validate(const Dataset& train) const;
  Eigen::Index effective_batch_size(Eigen::Index n) const {
    return batch_size <= 0 ? n : batch_size;
  }
};

/// Multipliers crossed the blow-up threshold.
class DualBlowup : public NumericError {
 public:
  DualBlowup(const std::string& what, std::vector<int> ids)
      : NumericError(what, ids.empty() ? -1 : ids.front()), ids_(std::move(ids)) {}
  const std::vector<int>& ids() const { return ids_; }

 private:
  std::vector<int> ids_;
};

/// Alternating dual-first primal-dual loop over mini-batches.
class Trainer {
 public:
  /// `train` must outlive the trainer.
  Trainer(TrainerConfig config, ModelParams model, const Dataset& train);

  /// One step on `batch`: per-sample losses, multiplier update for the
  /// batch's ids only, then a primal step weighted by the updated
  /// multipliers. Throws NumericError or DualBlowup.
  void step(const Batch& batch);

  /// One shuffled pass over the training set.
  void run_epoch();

  int epoch() const { return epoch_; }
  long steps() const { return steps_; }
  const ModelParams& model() const { return model_; }
  const MultiplierState& multipliers() const { return multipliers_; }
  const ConstraintSpec& constraints() const { return constraints_; }
  const TrainerConfig& config() const { return config_; }

  /// The primal weights used by the last step, aligned with its batch.
  const Eigen::VectorXd& last_weights() const { return last_weights_; }

 private:
  double current_primal_step() const;

  TrainerConfig config_;
  ModelParams model_;
  const Dataset& train_;
  ConstraintSpec constraints_;
  MultiplierState multipliers_;
  PrimalOptimizer optimizer_;
  Eigen::VectorXd last_weights_;
  long total_steps_ = 0;
  long steps_ = 0;
  int epoch_ = 0;
};

struct EpochMetrics {
  int epoch = 0;
  double train_mean_loss = 0.0;
  double train_max_loss = 0.0;
  double train_accuracy = 0.0;  // NaN for regression
  double train_satisfied_fraction = 0.0;
  double test_mean_loss = 0.0;
  double test_max_loss = 0.0;
  double test_accuracy = 0.0;
  double test_satisfied_fraction = 0.0;  // NaN when eps is per sample
  double lambda_min = 0.0;
  double lambda_mean = 0.0;
  double lambda_max = 0.0;
  double lambda_fraction_zero = 0.0;
};

enum class RunStatus { completed, aborted };

struct RunRecord {
  TrainerConfig config;
  EpochMetrics initial;
  std::vector<EpochMetrics> trajectory;  // one entry per finished epoch
  LossVector final_train_losses;
  LossVector final_test_losses;
  Eigen::MatrixXd final_train_outputs;
  Eigen::MatrixXd final_test_outputs;
  MultiplierState multipliers;
  ModelParams model;
  RunStatus status = RunStatus::completed;
  std::string abort_reason;
  std::vector<int> offending_ids;
  long steps = 0;
  double wall_seconds = 0.0;
};

RunRecord train(const TrainerConfig& config, ModelParams model, const Dataset& train,
                const Dataset& test);

struct FeasibilityReport {
  Eigen::Index satisfied_count = 0;
  double max_violation = 0.0;
  std::vector<int> violating_ids;
};

/// Samples with g_i <= eps_i + tol are satisfied; max_violation = max [g - eps]_+.
FeasibilityReport feasibility_report(const LossVector& losses, const ConstraintSpec& spec,
                                     double tol = 1e-8);
FeasibilityReport feasibility_report(const ModelParams& model, LossKind loss,
                                     const Dataset& dataset, const ConstraintSpec& spec,
                                     double tol = 1e-8);

/// Exact minimum-norm least-squares ERM fit for models that are linear in
/// their parameters (polynomials, single-output linear models).
ModelParams solve_least_squares(ModelParams model, const Dataset& dataset);

std::string to_string(Method method);
Method parse_method(const std::string& name);

}  // namespace feasible
