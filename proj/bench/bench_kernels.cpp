// Serial reference against the OpenMP path for the ensemble kernels.
// Arg 0 selects Exec::Serial, 1 Exec::Parallel.

#include <benchmark/benchmark.h>

#include "infavg/billiard.hpp"
#include "infavg/config.hpp"
#include "infavg/experiments.hpp"
#include "infavg/greenkubo.hpp"
#include "infavg/shift_toy.hpp"

using namespace infavg;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& st) {
  st.SetLabel(st.range(0) == 0 ? "serial" : "parallel x" + std::to_string(max_threads()));
}

FieldSpec toy_spec() {
  FieldSpec f;
  f.terms.front().g = {"sin", {1.0}, 0.5};
  return f;
}

void BM_ToyErrorEnsemble(benchmark::State& st) {
  const auto field = build_toy_field(toy_spec());
  OrbitOptions o{1e-3, 1.0, 4, 256, 7, exec_of(st), kStreamToyOrbits};
  for (auto _ : st) benchmark::DoNotOptimize(error_ensemble(ShiftToy{}, field, Vector::Constant(1, 1.0), o));
  st.SetItemsProcessed(st.iterations() * o.n * 1000);
  label(st);
}

void BM_BilliardBirkhoffEnsemble(benchmark::State& st) {
  const BilliardSystem sys(default_billiard());
  FieldSpec spec;
  spec.terms.front().h.kind = "sin_theta";
  const auto field = build_billiard_field(spec, sys);
  OrbitOptions o{1e-3, 1.0, 4, 64, 7, exec_of(st), kStreamBilliard};
  for (auto _ : st) benchmark::DoNotOptimize(birkhoff_ensemble(sys, field, Vector::Constant(1, 1.0), o));
  st.SetItemsProcessed(st.iterations() * o.n * 1000);
  label(st);
}

void BM_LocalTimeEnsemble(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(local_time_ensemble(1.0, 1.0, 1e-3, 2.0 * std::sqrt(1e-3), 2000, 7, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * 2000 * 1000);
  label(st);
}

void BM_GreenKuboModel(benchmark::State& st) {
  const auto field = build_toy_field(toy_spec());
  GkOptions o;
  o.l_max = 20;
  o.n_samples = 20000;
  o.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(green_kubo_model(ShiftToy{}, field, o));
  st.SetItemsProcessed(st.iterations() * o.n_samples);
  label(st);
}

void BM_BilliardSigma(benchmark::State& st) {
  const BilliardSystem sys(default_billiard());
  SigmaOptions o;
  o.n_samples = 5000;
  o.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(estimate_sigma(sys, o));
  st.SetItemsProcessed(st.iterations() * o.n_samples);
  label(st);
}

}  // namespace

BENCHMARK(BM_ToyErrorEnsemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BilliardBirkhoffEnsemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalTimeEnsemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GreenKuboModel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BilliardSigma)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
