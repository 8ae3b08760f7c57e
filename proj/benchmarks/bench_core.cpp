#include <benchmark/benchmark.h>

#include "krbn/drift.hpp"
#include "krbn/kinetic.hpp"
#include "krbn/pea.hpp"
#include "krbn/rng.hpp"
#include "krbn/stable_noise.hpp"

using namespace krbn;

static void BM_SampleIncrement(benchmark::State& st) {
  const StableNoiseSpec spec = StableNoiseSpec::make(st.range(0) / 10.0, 1);
  Rng rng(1, 0);
  for (auto _ : st) benchmark::DoNotOptimize(sample_increment(spec, 0.01, rng));
}
BENCHMARK(BM_SampleIncrement)->Arg(12)->Arg(15)->Arg(20);

static void BM_Mollify(benchmark::State& st) {
  const DriftModel m = DriftModel::peano(0.5);
  MollifierSpec moll;
  moll.eps = 0.05;
  Vec x(1);
  x << 0.3;
  for (auto _ : st) benchmark::DoNotOptimize(mollify(m, moll, 0.0, x));
}
BENCHMARK(BM_Mollify);

static void BM_FieldEval(benchmark::State& st) {
  const auto mode = st.range(0) ? FieldMode::Tabulated : FieldMode::Direct;
  const auto field = make_drift_field(DriftModel::peano(0.5), 0.05, mode);
  Vec x(1);
  double y = -2.0;
  for (auto _ : st) {
    x << y;
    benchmark::DoNotOptimize(field->value(0.0, x));
    y = y > 2.0 ? -2.0 : y + 1e-3;
  }
}
BENCHMARK(BM_FieldEval)->Arg(0)->Arg(1);

static void BM_Characteristic(benchmark::State& st) {
  const SystemSpec spec = SystemSpec::standard(StableNoiseSpec::make(2.0, 1), DriftModel::peano(0.5));
  Vec v = Vec::Zero(1), x = Vec::Constant(1, 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(flow_theta(spec, 0.05, 0.0, 1.0, v, x));
}
BENCHMARK(BM_Characteristic)->Unit(benchmark::kMicrosecond);

static void BM_Ensemble(benchmark::State& st) {
  const SystemSpec spec = SystemSpec::standard(StableNoiseSpec::make(1.5, 1), DriftModel::peano(0.5));
  const auto field = make_drift_field(spec.drift, 0.05, FieldMode::Tabulated);
  const auto grid = uniform_grid(0.0, 1.0, 100);
  EnsembleOptions opt;
  opt.paths = static_cast<std::size_t>(st.range(0));
  opt.snapshot_times = {1.0};
  const State x0{Vec::Zero(1), Vec::Zero(1)};
  for (auto _ : st) benchmark::DoNotOptimize(simulate_ensemble(spec, *field, x0, grid, opt));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Ensemble)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_PeaIntegral(benchmark::State& st) {
  PeaProbe p;
  p.model = DriftModel::peano(0.5);
  p.eps_list = {1e-8};
  Vec theta = Vec::Zero(1);
  for (auto _ : st) benchmark::DoNotOptimize(pea_integral(p, 1e-8, 0.0, 0.1, theta));
}
BENCHMARK(BM_PeaIntegral)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
