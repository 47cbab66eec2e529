#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "feasible/data.hpp"
#include "feasible/error.hpp"
#include "feasible/trainer.hpp"

namespace {

using namespace feasible;

Dataset single_point(double x, double y) {
  Dataset d;
  d.features = Eigen::MatrixXd::Constant(1, 1, x);
  d.targets = Eigen::VectorXd::Constant(1, y);
  d.ids = {0};
  return d;
}

TrainerConfig sgd_config(Method method, double primal, double dual = 1e-2) {
  TrainerConfig c;
  c.method = method;
  c.primal_step = primal;
  c.dual_step = dual;
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_metrics(const EpochMetrics& a, const EpochMetrics& b) {
  const double xa[] = {a.train_mean_loss, a.train_max_loss, a.train_accuracy,
                       a.train_satisfied_fraction, a.test_mean_loss, a.test_max_loss,
                       a.test_accuracy, a.test_satisfied_fraction, a.lambda_min, a.lambda_mean,
                       a.lambda_max, a.lambda_fraction_zero};
  const double xb[] = {b.train_mean_loss, b.train_max_loss, b.train_accuracy,
                       b.train_satisfied_fraction, b.test_mean_loss, b.test_max_loss,
                       b.test_accuracy, b.test_satisfied_fraction, b.lambda_min, b.lambda_mean,
                       b.lambda_max, b.lambda_fraction_zero};
  for (std::size_t i = 0; i < std::size(xa); ++i)
    if (!same_bits(xa[i], xb[i])) return false;
  return a.epoch == b.epoch;
}

TEST(Trainer, FeasibleAtInitNeverMoves) {
  const auto data = gen_noisy_cosine(12, 0.1, 0);
  auto model = make_polynomial(3, Basis::chebyshev, {0.0, 1.0});
  auto config = sgd_config(Method::fl, 0.1);
  config.epsilon = {10.0};
  config.epochs = 20;
  config.batch_size = 4;
  const auto record = train(config, model, data, data);
  EXPECT_TRUE((record.multipliers.lambda.array() == 0.0).all());
  EXPECT_EQ(record.model.theta, model.theta);
}

TEST(Trainer, FullBatchErmIsGradientDescent) {
  const auto data = gen_outlier_regression(40, 2, 2.0, 0.3, 1);
  auto model = make_linear(2, 1);
  model.theta << 0.3, -0.2, 0.1;
  auto config = sgd_config(Method::erm, 0.05);
  config.epochs = 50;
  const auto record = train(config, model, data, data);

  Eigen::VectorXd theta = model.theta;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(40, 1.0 / 40);
  for (int t = 0; t < 50; ++t) {
    const auto g = weighted_loss_grad(ModelParams{model.shape, theta}, LossKind::squared_error,
                                      data.features, data.targets, w);
    theta -= 0.05 * g;
  }
  EXPECT_LE((record.model.theta - theta).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Trainer, BestResponseRflReproducesCserm) {
  const auto data = gen_noisy_cosine(16, 0.3, 2);
  auto model = make_mlp({1, 6, 1});
  init_fan_in_uniform(model, 5);
  auto rfl = sgd_config(Method::rfl, 0.005);
  rfl.alpha = 2.0;
  rfl.epsilon = {0.05};
  rfl.dual_update = DualUpdate::best_response;
  auto cserm = rfl;
  cserm.method = Method::cserm;
  cserm.dual_update = DualUpdate::projected_ascent;
  Trainer a(rfl, model, data);
  Trainer b(cserm, model, data);
  const auto batch = full_batch(data);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    a.step(batch);
    b.step(batch);
    worst = std::max(worst, (a.model().theta - b.model().theta).norm());
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Trainer, DualStepComesFirst) {
  // One constant parameter, one sample: with lambda_0 = 0, a primal-first
  // step would not move theta at all.
  const auto data = single_point(0.0, 1.0);
  const auto model = make_polynomial(0, Basis::monomial);
  auto config = sgd_config(Method::fl, 0.1, 0.5);
  Trainer trainer(config, model, data);
  trainer.step(full_batch(data));
  EXPECT_DOUBLE_EQ(trainer.multipliers().lambda(0), 0.5);
  EXPECT_DOUBLE_EQ(trainer.last_weights()(0), 0.5);
  EXPECT_DOUBLE_EQ(trainer.model().theta(0), 0.1 * 0.5 * 2.0);
}

TEST(Trainer, UnseenMultipliersAreUntouched) {
  const auto data = gen_conflicting_pairs(6, 2, 1.0, 0);
  auto config = sgd_config(Method::fl, 1e-3);
  config.epsilon = {0.0};
  Trainer trainer(config, make_linear(2, 1), data);
  trainer.step(full_batch(data));
  const auto before = trainer.multipliers();
  const std::vector<int> ids{1, 4, 7};
  trainer.step(make_batch(data, ids));
  const auto& after = trainer.multipliers();
  for (int id = 0; id < 12; ++id) {
    const bool in_batch = id == 1 || id == 4 || id == 7;
    if (!in_batch) {
      EXPECT_TRUE(same_bits(after.lambda(id), before.lambda(id))) << id;
    } else {
      EXPECT_NE(after.lambda(id), before.lambda(id)) << id;
    }
  }
}

TEST(Trainer, LastUpdateEpochTracksVisits) {
  const auto data = gen_two_moons(20, 0.1, 0);
  auto config = sgd_config(Method::fl, 1e-2);
  config.loss = LossKind::cross_entropy;
  config.epsilon = {0.1};
  auto model = make_mlp({2, 4, 2});
  init_fan_in_uniform(model, 0);
  Trainer trainer(config, model, data);
  EXPECT_EQ(trainer.multipliers().last_update_epoch, std::vector<long>(20, -1));
  trainer.step(make_batch(data, std::vector<int>{3, 5}));
  EXPECT_EQ(trainer.multipliers().last_update_epoch[3], 0);
  EXPECT_EQ(trainer.multipliers().last_update_epoch[4], -1);
  trainer.run_epoch();
  trainer.run_epoch();
  for (long e : trainer.multipliers().last_update_epoch) EXPECT_EQ(e, 1);
}

TEST(Trainer, RunsAreBitwiseReproducible) {
  const auto data = gen_two_moons(60, 0.1, 1);
  const auto [tr, te] = train_test_split(data, 0.25, 1);
  auto config = sgd_config(Method::fl, 1e-2, 5e-2);
  config.loss = LossKind::cross_entropy;
  config.optimizer.kind = OptimizerKind::adamw;
  config.epsilon = {0.1};
  config.batch_size = 16;
  config.epochs = 15;
  config.seed = 42;
  auto model = make_mlp({2, 8, 2});
  init_fan_in_uniform(model, 42);
  const auto a = train(config, model, tr, te);
  const auto b = train(config, model, tr, te);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  EXPECT_TRUE(same_metrics(a.initial, b.initial));
  for (std::size_t i = 0; i < a.trajectory.size(); ++i)
    EXPECT_TRUE(same_metrics(a.trajectory[i], b.trajectory[i])) << "epoch " << i + 1;
  EXPECT_EQ(a.model.theta, b.model.theta);
  EXPECT_EQ(a.multipliers.lambda, b.multipliers.lambda);
}

TEST(Trainer, ErmAndFlStepsCostTheSamePasses) {
  const auto data = gen_two_moons(64, 0.1, 0);
  auto model = make_mlp({2, 16, 2});
  init_fan_in_uniform(model, 0);
  const auto batch = make_batch(data, shuffled_partition(64, 32, 0).front());
  auto passes = [&](Method m) {
    auto config = sgd_config(m, 1e-2);
    config.loss = LossKind::cross_entropy;
    config.epsilon = {0.1};
    if (m == Method::rfl) config.alpha = 1.0;
    Trainer trainer(config, model, data);
    reset_pass_counts();
    trainer.step(batch);
    return pass_counts();
  };
  const auto erm = passes(Method::erm);
  const auto fl = passes(Method::fl);
  const auto rfl = passes(Method::rfl);
  EXPECT_EQ(erm.forward, 1);
  EXPECT_EQ(erm.backward, 1);
  EXPECT_EQ(fl.forward, erm.forward);
  EXPECT_EQ(fl.backward, erm.backward);
  EXPECT_EQ(rfl.forward, erm.forward);
  EXPECT_EQ(rfl.backward, erm.backward);
}

TEST(Trainer, InfeasibleFlGrowsWhileRflStaysBounded) {
  const auto data = gen_conflicting_pairs(8, 2, 1.0, 0);
  auto fl = sgd_config(Method::fl, 1e-4, 1e-2);
  fl.epsilon = {0.0};
  auto rfl = fl;
  rfl.method = Method::rfl;
  rfl.alpha = 1.0;
  Trainer a(fl, make_linear(2, 1), data);
  Trainer b(rfl, make_linear(2, 1), data);
  const auto batch = full_batch(data);
  double max_violation = 0.0;
  double previous = 0.0;
  for (int t = 1; t <= 3000; ++t) {
    const auto g = per_sample_loss(LossKind::squared_error, forward(b.model(), data.features),
                                   data.targets);
    max_violation = std::max(max_violation, g.maxCoeff());
    a.step(batch);
    b.step(batch);
    ASSERT_LE(b.multipliers().lambda.maxCoeff(),
              rfl.alpha * max_violation + rfl.dual_step * max_violation);
    if (t % 500 == 0) {
      EXPECT_GT(a.multipliers().lambda.maxCoeff(), previous);
      previous = a.multipliers().lambda.maxCoeff();
    }
  }
  EXPECT_GT(previous, 10.0 * b.multipliers().lambda.maxCoeff());
}

TEST(Train, DualBlowupAbortsWithIds) {
  const auto data = gen_conflicting_pairs(4, 1, 2.0, 0);
  auto config = sgd_config(Method::fl, 1e-3, 1.0);
  config.epsilon = {0.0};
  config.epochs = 100;
  config.blowup_threshold = 5.0;
  const auto record = train(config, make_linear(1, 1), data, data);
  EXPECT_EQ(record.status, RunStatus::aborted);
  EXPECT_NE(record.abort_reason.find("blow-up"), std::string::npos);
  EXPECT_FALSE(record.offending_ids.empty());
  EXPECT_LT(record.trajectory.size(), 100u);
}

TEST(Train, NonFiniteLossAborts) {
  const auto data = gen_outlier_regression(20, 2, 2.0, 0.1, 0);
  auto config = sgd_config(Method::erm, 1e6);
  config.epochs = 200;
  const auto record = train(config, make_linear(2, 1), data, data);
  EXPECT_EQ(record.status, RunStatus::aborted);
  EXPECT_FALSE(record.abort_reason.empty());
}

TEST(Train, TrajectoryHasOneEntryPerEpoch) {
  const auto data = gen_noisy_cosine(10, 0.1, 0);
  auto config = sgd_config(Method::erm, 0.1);
  config.epochs = 7;
  config.batch_size = 3;
  const auto record = train(config, make_polynomial(3, Basis::chebyshev, {0.0, 1.0}), data, data);
  ASSERT_EQ(record.trajectory.size(), 7u);
  for (int e = 0; e < 7; ++e) EXPECT_EQ(record.trajectory[static_cast<std::size_t>(e)].epoch, e + 1);
  EXPECT_EQ(record.steps, 7 * 4);
  EXPECT_TRUE(std::isnan(record.initial.train_accuracy));
}

TEST(Train, ZeroEpochsRecordsInitialStateOnly) {
  const auto data = gen_noisy_cosine(10, 0.1, 0);
  auto config = sgd_config(Method::erm, 0.1);
  config.epochs = 0;
  const auto record = train(config, make_polynomial(2, Basis::monomial), data, data);
  EXPECT_TRUE(record.trajectory.empty());
  EXPECT_EQ(record.status, RunStatus::completed);
  EXPECT_EQ(record.final_train_losses.size(), 10);
}

TEST(Train, PerSampleEpsilonLeavesTestSatisfactionUndefined) {
  const auto data = gen_noisy_cosine(5, 0.1, 0);
  auto config = sgd_config(Method::fl, 0.1);
  config.epsilon = {0.1, 0.2, 0.3, 0.4, 0.5};
  config.epochs = 1;
  const auto record = train(config, make_polynomial(2, Basis::monomial), data, data);
  EXPECT_TRUE(std::isnan(record.trajectory[0].test_satisfied_fraction));
  EXPECT_FALSE(std::isnan(record.trajectory[0].train_satisfied_fraction));
}

TEST(TrainerConfig, Validation) {
  const auto reg = gen_noisy_cosine(10, 0.1, 0);
  const auto cls = gen_two_moons(10, 0.1, 0);
  auto c = sgd_config(Method::rfl, 0.1);
  EXPECT_THROW(c.validate(reg), ParameterError);  // rfl without alpha
  c = sgd_config(Method::fl, 0.1);
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(reg), ParameterError);  // fl with alpha
  c = sgd_config(Method::erm, 0.0);
  EXPECT_THROW(c.validate(reg), ParameterError);
  c = sgd_config(Method::erm, 0.1);
  c.loss = LossKind::cross_entropy;
  EXPECT_THROW(c.validate(reg), ParameterError);
  c.loss = LossKind::squared_error;
  EXPECT_THROW(c.validate(cls), ParameterError);
  c = sgd_config(Method::erm, 0.1);
  c.batch_size = 11;
  EXPECT_THROW(c.validate(reg), ParameterError);
  c.batch_size = 10;
  c.epsilon = {0.1, 0.2};
  EXPECT_THROW(c.validate(reg), ParameterError);
  c.epsilon = {-0.1};
  EXPECT_THROW(c.validate(reg), ParameterError);
  c = sgd_config(Method::cserm, 0.1);
  c.alpha = 1.0;
  EXPECT_NO_THROW(c.validate(reg));
}

TEST(FeasibilityReport, Examples) {
  const auto all_zero = feasibility_report(Eigen::VectorXd::Zero(4), ConstraintSpec::uniform(0.0, 4));
  EXPECT_EQ(all_zero.satisfied_count, 4);
  EXPECT_EQ(all_zero.max_violation, 0.0);
  EXPECT_TRUE(all_zero.violating_ids.empty());

  Eigen::VectorXd g(2);
  g << 0.6, 0.3;
  const auto r = feasibility_report(g, ConstraintSpec::uniform(0.51, 2));
  EXPECT_EQ(r.satisfied_count, 1);
  EXPECT_EQ(r.violating_ids, std::vector<int>{0});
  EXPECT_NEAR(r.max_violation, 0.09, 1e-15);
}

TEST(FeasibilityReport, ConflictingPairsCannotAllBeSatisfied) {
  const auto data = gen_conflicting_pairs(4, 2, 2.0, 3);
  auto config = sgd_config(Method::fl, 1e-3, 1e-2);
  config.epsilon = {0.0};
  config.epochs = 500;
  const auto record = train(config, make_linear(2, 1), data, data);
  const auto r = feasibility_report(record.model, LossKind::squared_error, data,
                                    ConstraintSpec::uniform(0.0, data.size()));
  EXPECT_LT(r.satisfied_count, data.size());
  // Each pair forces a squared error of at least (gap / 2)^2 on one member.
  EXPECT_GE(r.max_violation, 1.0 - 1e-12);
}

TEST(LeastSquares, DegreeTwentyInterpolatesTwentyPoints) {
  const auto data = gen_noisy_cosine(20, 0.2, 0);
  const auto fit = solve_least_squares(make_polynomial(20, Basis::chebyshev, {0.0, 1.0}), data);
  const auto g = per_sample_loss(LossKind::squared_error, forward(fit, data.features), data.targets);
  EXPECT_LE(g.mean(), 1e-6);
}

TEST(LeastSquares, LinearModelRecoversExactFit) {
  Dataset d;
  d.features.resize(4, 2);
  d.features << 0, 1, 1, 0, 2, 2, -1, 3;
  d.targets.resize(4);
  for (int i = 0; i < 4; ++i) d.targets(i) = 2.0 * d.features(i, 0) - d.features(i, 1) + 0.5;
  d.ids = {0, 1, 2, 3};
  const auto fit = solve_least_squares(make_linear(2, 1), d);
  EXPECT_NEAR(fit.theta(0), 2.0, 1e-12);
  EXPECT_NEAR(fit.theta(1), -1.0, 1e-12);
  EXPECT_NEAR(fit.theta(2), 0.5, 1e-12);
  EXPECT_THROW(solve_least_squares(make_mlp({2, 3, 1}), d), ParameterError);
}

TEST(Method, NamesRoundTrip) {
  for (auto m : {Method::erm, Method::fl, Method::rfl, Method::cserm})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("dpo"), ParameterError);
}

}  // namespace
