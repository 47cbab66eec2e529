#include <benchmark/benchmark.h>

#include "feasible/data.hpp"
#include "feasible/models.hpp"
#include "feasible/trainer.hpp"

namespace {

using namespace feasible;

TrainerConfig two_moons_config(Method method) {
  TrainerConfig c;
  c.method = method;
  c.loss = LossKind::cross_entropy;
  c.optimizer.kind = OptimizerKind::adamw;
  c.primal_step = 5e-4;
  c.dual_step = 1e-2;
  c.epsilon = {0.10536051565782628};
  c.batch_size = 512;
  if (method == Method::rfl) c.alpha = 1.0;
  return c;
}

void step_benchmark(benchmark::State& state, Method method) {
  const auto data = gen_two_moons(1000, 0.1, 0);
  auto model = make_mlp({2, 70, 70, 2});
  init_fan_in_uniform(model, 0);
  Trainer trainer(two_moons_config(method), model, data);
  const auto batches = batch_iter(data, 512, 0);
  std::size_t k = 0;
  for (auto _ : state) {
    trainer.step(batches[k]);
    k = (k + 1) % batches.size();
  }
  state.SetItemsProcessed(state.iterations() * 512);
}

void BM_ErmStep(benchmark::State& state) { step_benchmark(state, Method::erm); }
void BM_FlStep(benchmark::State& state) { step_benchmark(state, Method::fl); }
void BM_RflStep(benchmark::State& state) { step_benchmark(state, Method::rfl); }

void BM_WeightedLossGrad(benchmark::State& state) {
  const auto data = gen_two_moons(static_cast<int>(state.range(0)), 0.1, 0);
  auto model = make_mlp({2, 70, 70, 2});
  init_fan_in_uniform(model, 0);
  const Eigen::VectorXd weights = Eigen::VectorXd::Constant(data.size(), 1.0 / data.size());
  for (auto _ : state) {
    auto g = weighted_loss_grad(model, LossKind::cross_entropy, data.features, data.targets,
                                weights);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ErmStep);
BENCHMARK(BM_FlStep);
BENCHMARK(BM_RflStep);
BENCHMARK(BM_WeightedLossGrad)->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK_MAIN();
