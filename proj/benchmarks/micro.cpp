#include <benchmark/benchmark.h>

#include "coxgibbs/coxgibbs.hpp"

using namespace coxgibbs;

namespace {

SurvivalDataset synthetic(Index n) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.beta0 = Eigen::Vector4d(1.0, 0.5, -1.5, 3.0);
  cfg.seed = 11;
  return generate(cfg);
}

void BM_pg1(benchmark::State& state) {
  const double c = static_cast<double>(state.range(0));
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_pg1(c, rng).value);
}
BENCHMARK(BM_pg1)->Arg(0)->Arg(1)->Arg(4)->Arg(20);

void BM_gibbs_sweep(benchmark::State& state) {
  const auto data = synthetic(state.range(0));
  const auto pairs = build_pair_contrasts(data);
  FitConfig cfg;
  GibbsSampler sampler(pairs, cfg);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.p());
  std::uint64_t s = 0;
  for (auto _ : state) beta = sampler.sweep(beta, s++);
  state.counters["pairs"] = static_cast<double>(pairs.size());
}
BENCHMARK(BM_gibbs_sweep)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_score_hessian(benchmark::State& state) {
  const auto data = synthetic(state.range(0));
  PartialLikelihood pl(data, Ties::breslow);
  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(data.p(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(pl.score_hessian(beta));
}
BENCHMARK(BM_score_hessian)->Arg(300)->Arg(3000);

void BM_log_partial_likelihood(benchmark::State& state) {
  const auto data = synthetic(state.range(0));
  PartialLikelihood pl(data, Ties::breslow);
  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(data.p(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(pl.log_likelihood(beta));
}
BENCHMARK(BM_log_partial_likelihood)->Arg(300)->Arg(3000);

}  // namespace

BENCHMARK_MAIN();
