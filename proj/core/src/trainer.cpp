#include "feasible/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace feasible {

namespace {

struct Evaluation {
  LossVector losses;
  Eigen::MatrixXd outputs;
  double mean = 0.0;
  double max = 0.0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
};

Evaluation evaluate(const ModelParams& model, LossKind loss, const Dataset& data) {
  Evaluation out;
  if (data.size() == 0) {
    out.mean = out.max = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.outputs = forward(model, data.features);
  out.losses = per_sample_loss(loss, out.outputs, data.targets);
  out.mean = out.losses.mean();
  out.max = out.losses.maxCoeff();
  if (data.task == Task::classification) out.accuracy = accuracy(out.outputs, data.targets);
  return out;
}

double satisfied_fraction(const LossVector& losses, const Eigen::VectorXd& epsilon, double tol) {
  if (losses.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < losses.size(); ++i)
    if (losses(i) <= epsilon(i) + tol) ++count;
  return static_cast<double>(count) / static_cast<double>(losses.size());
}

EpochMetrics snapshot(const Trainer& trainer, const Dataset& train, const Dataset& test,
                      int epoch) {
  const auto& config = trainer.config();
  EpochMetrics m;
  m.epoch = epoch;
  const auto tr = evaluate(trainer.model(), config.loss, train);
  m.train_mean_loss = tr.mean;
  m.train_max_loss = tr.max;
  m.train_accuracy = tr.accuracy;
  m.train_satisfied_fraction =
      satisfied_fraction(tr.losses, trainer.constraints().epsilon, config.feasibility_tol);
  const auto te = evaluate(trainer.model(), config.loss, test);
  m.test_mean_loss = te.mean;
  m.test_max_loss = te.max;
  m.test_accuracy = te.accuracy;
  m.test_satisfied_fraction = std::numeric_limits<double>::quiet_NaN();
  if (config.epsilon.size() == 1 && test.size() > 0)
    m.test_satisfied_fraction =
        satisfied_fraction(te.losses, Eigen::VectorXd::Constant(test.size(), config.epsilon[0]),
                           config.feasibility_tol);
  const auto& lambda = trainer.multipliers().lambda;
  if (lambda.size() > 0) {
    m.lambda_min = lambda.minCoeff();
    m.lambda_mean = lambda.mean();
    m.lambda_max = lambda.maxCoeff();
    m.lambda_fraction_zero =
        static_cast<double>((lambda.array() <= 1e-12).count()) / static_cast<double>(lambda.size());
  }
  return m;
}

}  // namespace

void TrainerConfig::validate(const Dataset& train) const {
  if (!(primal_step > 0.0)) throw ParameterError("trainer: primal step size must be > 0");
  if ((method == Method::fl || method == Method::rfl) && !(dual_step > 0.0))
    throw ParameterError("trainer: dual step size must be > 0 for fl/rfl");
  if (method == Method::fl && alpha != kNoResilience)
    throw ParameterError("trainer: fl takes no alpha (it is the alpha = inf case)");
  if ((method == Method::rfl || method == Method::cserm) &&
      !(alpha > 0.0 && alpha < kNoResilience))
    throw ParameterError("trainer: rfl and cserm need a finite alpha > 0");
  if (dual_update == DualUpdate::best_response && method != Method::rfl)
    throw ParameterError("trainer: best-response multipliers only exist for rfl");
  if (epochs < 0) throw ParameterError("trainer: epochs must be >= 0");
  if (epsilon.empty()) throw ParameterError("trainer: epsilon is empty");
  if (epsilon.size() != 1 && static_cast<Eigen::Index>(epsilon.size()) != train.size())
    throw ParameterError("trainer: epsilon must be a scalar or one level per training sample");
  for (double e : epsilon)
    if (!(e >= 0.0) || !std::isfinite(e)) throw ParameterError("trainer: epsilon must be >= 0");
  if (train.size() < 1) throw ParameterError("trainer: empty training set");
  if (batch_size < 0 || batch_size > train.size())
    throw ParameterError("trainer: batch_size must be in [1, n] (0 = full batch)");
  if (loss == LossKind::cross_entropy && train.task != Task::classification)
    throw ParameterError("trainer: cross entropy needs a classification dataset");
  if (loss == LossKind::squared_error && train.task != Task::regression)
    throw ParameterError("trainer: squared error needs a regression dataset");
  if (!(blowup_threshold > 0.0)) throw ParameterError("trainer: blow-up threshold must be > 0");
}

namespace {

TrainerConfig validated(TrainerConfig config, const Dataset& train) {
  config.validate(train);
  return config;
}

}  // namespace

Trainer::Trainer(TrainerConfig config, ModelParams model, const Dataset& train)
    : config_(validated(std::move(config), train)),
      model_(std::move(model)),
      train_(train),
      constraints_(config_.epsilon.size() == 1
                       ? ConstraintSpec::uniform(config_.epsilon[0], train.size())
                       : ConstraintSpec::per_sample(Eigen::Map<const Eigen::VectorXd>(
                             config_.epsilon.data(),
                             static_cast<Eigen::Index>(config_.epsilon.size())))),
      multipliers_(MultiplierState::zeros(train.size())),
      optimizer_(config_.optimizer, model_.size()) {
  const auto bs = config_.effective_batch_size(train.size());
  total_steps_ = static_cast<long>(config_.epochs) * ((train.size() + bs - 1) / bs);
}

double Trainer::current_primal_step() const {
  if (!config_.cosine_decay || total_steps_ <= 0) return config_.primal_step;
  const double progress = std::min(1.0, static_cast<double>(steps_) / total_steps_);
  return 0.5 * config_.primal_step * (1.0 + std::cos(std::numbers::pi * progress));
}

void Trainer::step(const Batch& batch) {
  const auto pass = forward_cached(model_, batch.features);
  LossVector losses;
  try {
    losses = per_sample_loss(config_.loss, pass.output, batch.targets);
  } catch (const NumericError& e) {
    const long id = e.sample_id() >= 0 ? batch.ids[static_cast<std::size_t>(e.sample_id())] : -1;
    throw NumericError("non-finite loss for sample " + std::to_string(id), id);
  }

  Eigen::MatrixXd output_grad;
  switch (config_.method) {
    case Method::erm: {
      last_weights_ = Eigen::VectorXd::Constant(batch.size(), 1.0 / batch.size());
      output_grad = loss_output_grad(config_.loss, pass.output, batch.targets, last_weights_);
      break;
    }
    case Method::fl:
    case Method::rfl: {
      const Eigen::VectorXd eps = constraints_.slice(batch.ids);
      Eigen::VectorXd lambda(batch.size());
      for (Eigen::Index k = 0; k < batch.size(); ++k)
        lambda(k) = multipliers_.lambda(batch.ids[static_cast<std::size_t>(k)]);
      Eigen::VectorXd updated;
      if (config_.dual_update == DualUpdate::best_response) {
        updated = analytic_dual_opt(losses, eps, config_.alpha);
      } else {
        try {
          updated = dual_step(lambda, violations(losses, eps), config_.dual_step, config_.alpha);
        } catch (const NumericError& e) {
          const int id = batch.ids[static_cast<std::size_t>(e.sample_id())];
          throw DualBlowup("non-finite multiplier for sample " + std::to_string(id), {id});
        }
      }
      std::vector<int> blown;
      for (Eigen::Index k = 0; k < batch.size(); ++k) {
        const int id = batch.ids[static_cast<std::size_t>(k)];
        multipliers_.lambda(id) = updated(k);
        multipliers_.last_update_epoch[static_cast<std::size_t>(id)] = epoch_;
        if (updated(k) > config_.blowup_threshold) blown.push_back(id);
      }
      if (!blown.empty()) {
        std::ostringstream msg;
        msg << "dual blow-up: " << blown.size() << " multiplier(s) above "
            << config_.blowup_threshold << ", first id " << blown.front();
        throw DualBlowup(msg.str(), std::move(blown));
      }
      // Dual first: the primal step uses the multipliers just computed.
      last_weights_ = std::move(updated);
      output_grad = loss_output_grad(config_.loss, pass.output, batch.targets, last_weights_);
      break;
    }
    case Method::cserm: {
      const Eigen::VectorXd eps = constraints_.slice(batch.ids);
      last_weights_ = config_.alpha * (losses - eps).cwiseMax(0.0);
      output_grad = clamped_squared_output_grad(config_.loss, pass.output, batch.targets, eps,
                                                config_.alpha);
      break;
    }
  }

  const Eigen::VectorXd grad = backward(model_, pass, output_grad);
  if (!grad.allFinite()) throw NumericError("non-finite primal gradient");
  optimizer_.step(model_.theta, grad, current_primal_step());
  if (!model_.theta.allFinite()) throw NumericError("non-finite parameters after primal step");
  ++steps_;
}

void Trainer::run_epoch() {
  const auto bs = config_.effective_batch_size(train_.size());
  const auto partition =
      shuffled_partition(train_.size(), bs, epoch_seed(config_.seed, static_cast<std::uint64_t>(epoch_)));
  for (const auto& ids : partition) step(make_batch(train_, ids));
  ++epoch_;
}

RunRecord train(const TrainerConfig& config, ModelParams model, const Dataset& train_set,
                const Dataset& test_set) {
  const auto start = std::chrono::steady_clock::now();
  Trainer trainer(config, std::move(model), train_set);
  RunRecord record;
  record.config = config;
  record.initial = snapshot(trainer, train_set, test_set, 0);
  try {
    for (int e = 1; e <= config.epochs; ++e) {
      trainer.run_epoch();
      record.trajectory.push_back(snapshot(trainer, train_set, test_set, e));
    }
  } catch (const DualBlowup& e) {
    record.status = RunStatus::aborted;
    record.abort_reason = e.what();
    record.offending_ids = e.ids();
  } catch (const NumericError& e) {
    record.status = RunStatus::aborted;
    record.abort_reason = e.what();
    if (e.sample_id() >= 0) record.offending_ids.push_back(static_cast<int>(e.sample_id()));
  }
  record.multipliers = trainer.multipliers();
  record.model = trainer.model();
  record.steps = trainer.steps();
  try {
    auto tr = evaluate(record.model, config.loss, train_set);
    auto te = evaluate(record.model, config.loss, test_set);
    record.final_train_losses = std::move(tr.losses);
    record.final_train_outputs = std::move(tr.outputs);
    record.final_test_losses = std::move(te.losses);
    record.final_test_outputs = std::move(te.outputs);
  } catch (const NumericError&) {
    // Aborted with a broken model; final losses stay empty.
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

FeasibilityReport feasibility_report(const LossVector& losses, const ConstraintSpec& spec,
                                     double tol) {
  if (losses.size() != spec.size()) throw ShapeError("feasibility_report: length mismatch");
  FeasibilityReport report;
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    const double v = losses(i) - spec.epsilon(i);
    if (v <= tol)
      ++report.satisfied_count;
    else
      report.violating_ids.push_back(static_cast<int>(i));
    report.max_violation = std::max(report.max_violation, v);
  }
  return report;
}

FeasibilityReport feasibility_report(const ModelParams& model, LossKind loss,
                                     const Dataset& dataset, const ConstraintSpec& spec,
                                     double tol) {
  const auto losses = per_sample_loss(loss, forward(model, dataset.features), dataset.targets);
  // Row i carries id dataset.ids[i]; report ids, not rows.
  LossVector by_id(losses.size());
  for (Eigen::Index i = 0; i < losses.size(); ++i) by_id(dataset.ids[static_cast<std::size_t>(i)]) = losses(i);
  return feasibility_report(by_id, spec, tol);
}

ModelParams solve_least_squares(ModelParams model, const Dataset& dataset) {
  Eigen::MatrixXd design;
  if (model.shape.architecture == Architecture::polynomial) {
    if (dataset.dims() != 1) throw ShapeError("least squares: polynomial needs 1 feature");
    design = poly_features(dataset.features.col(0), model.shape.degree, model.shape.basis,
                           model.shape.domain);
  } else if (model.shape.layers.size() == 2 && model.shape.layers[1] == 1) {
    if (dataset.dims() != model.shape.layers[0]) throw ShapeError("least squares: width mismatch");
    design.resize(dataset.size(), dataset.dims() + 1);
    design << dataset.features, Eigen::VectorXd::Ones(dataset.size());
  } else {
    throw ParameterError("least squares: model is not linear in its parameters");
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  model.theta = cod.solve(dataset.targets);
  return model;
}

std::string to_string(Method method) {
  switch (method) {
    case Method::erm:
      return "erm";
    case Method::fl:
      return "fl";
    case Method::rfl:
      return "rfl";
    case Method::cserm:
      return "cserm";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "erm") return Method::erm;
  if (name == "fl") return Method::fl;
  if (name == "rfl") return Method::rfl;
  if (name == "cserm") return Method::cserm;
  throw ParameterError("unknown method '" + name + "'");
}

}  // namespace feasible
