#include <benchmark/benchmark.h>

#include <random>

#include "odt/analysis.hpp"
#include "odt/forward.hpp"
#include "odt/inversion.hpp"

using namespace odt;

namespace {

RealVec random_object(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealVec f(n);
  for (auto& v : f) v = u(rng);
  return f;
}

void BM_NdftApply(benchmark::State& state, NdftMethod method) {
  const int K = static_cast<int>(state.range(0));
  const auto cfg = ExperimentConfig::scaled(2, K, 6.0);
  const NdftOperator op(build_node_set(cfg), K, cfg.L_s, method);
  const auto f = random_object(cfg.object_size());
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(f));
  state.counters["nodes"] = static_cast<double>(op.nodes().node_count());
}
BENCHMARK_CAPTURE(BM_NdftApply, direct, NdftMethod::direct)->Arg(16)->Arg(32)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_NdftApply, fast, NdftMethod::fast)->Arg(16)->Arg(32)->Arg(60)->Arg(120)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_NdftAdjointFast(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto cfg = ExperimentConfig::scaled(2, K, 6.0);
  const NdftOperator op(build_node_set(cfg), K, cfg.L_s, NdftMethod::fast);
  ComplexVec g(op.nodes().node_count(), Complex(0.3, -0.1));
  for (auto _ : state) benchmark::DoNotOptimize(op.adjoint_real(g));
}
BENCHMARK(BM_NdftAdjointFast)->Arg(60)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_Ndft3D(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  auto cfg = ExperimentConfig::scaled(3, K, 4.0);
  const NdftOperator op(build_node_set(cfg), K, cfg.L_s, NdftMethod::fast);
  const auto f = random_object(cfg.object_size());
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(f));
}
BENCHMARK(BM_Ndft3D)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_DtotApply(benchmark::State& state) {
  const auto cfg = ExperimentConfig::scaled(2, static_cast<int>(state.range(0)), 6.0);
  const OdtModel model(cfg);
  const auto f = render_phantom(mini_shapes(2, cfg.L_s), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(dtot_apply(f, model));
}
BENCHMARK(BM_DtotApply)->Arg(60)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_BornConvolution(benchmark::State& state) {
  const auto cfg = ExperimentConfig::scaled(2, static_cast<int>(state.range(0)), 6.0);
  const auto f = render_phantom(mini_shapes(2, cfg.L_s), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(born_convolution_forward(f, cfg));
}
BENCHMARK(BM_BornConvolution)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_PdIteration(benchmark::State& state) {
  const auto cfg = ExperimentConfig::scaled(2, static_cast<int>(state.range(0)), 6.0);
  const OdtModel model(cfg);
  const auto f = render_phantom(mini_shapes(2, cfg.L_s), cfg);
  const auto g = model.ndft().apply(f.values);
  PdParams p;
  p.lambda = 1e-3;
  p.iterations = 10;
  const auto warm = pd_tv_solve(g, model.ndft(), p).state;
  p.iterations = 1;
  for (auto _ : state) benchmark::DoNotOptimize(pd_tv_solve(g, model.ndft(), p, &warm));
}
BENCHMARK(BM_PdIteration)->Arg(60)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_CgIteration(benchmark::State& state) {
  const auto cfg = ExperimentConfig::scaled(2, static_cast<int>(state.range(0)), 6.0);
  const OdtModel model(cfg);
  const auto f = render_phantom(mini_shapes(2, cfg.L_s), cfg);
  const auto g = model.ndft().apply(f.values);
  for (auto _ : state) benchmark::DoNotOptimize(cg_solve(g, model.ndft(), WeightsMode::quadrature, 1));
}
BENCHMARK(BM_CgIteration)->Arg(60)->Arg(240)->Unit(benchmark::kMillisecond);

}  // namespace
