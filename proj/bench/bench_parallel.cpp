// OpenMP batch kernels against their serial references.

#include "partlag/central_field.hpp"
#include "partlag/parallel.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace partlag;

namespace {

const HamiltonianSystem& system() {
  static const HamiltonianSystem hs = central::hamiltonian_system();
  return hs;
}

std::vector<std::vector<double>> initial_states(std::size_t count) {
  const central::Params P;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(central::initial_state(0.8 + 0.5 * U(rng), 0.2 * U(rng), 0, 0.9 + 0.2 * U(rng),
                                         0.05 * U(rng), P));
  }
  return out;
}

std::vector<std::vector<double>> phase_points(std::size_t count) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> R(0.5, 3), U(-1, 1);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back({R(rng), U(rng), U(rng), U(rng), U(rng)});
  return out;
}

void BM_integrate_serial(benchmark::State& state) {
  const auto z0 = initial_states(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(par::integrate_batch_serial(system(), z0, 0, 20));
}

void BM_integrate_parallel(benchmark::State& state) {
  const auto z0 = initial_states(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(par::integrate_batch(system(), z0, 0, 20));
  state.counters["threads"] = par::max_threads();
}

void BM_identity_serial(benchmark::State& state) {
  const auto pts = phase_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(par::identity_suite_serial(system(), pts));
}

void BM_identity_parallel(benchmark::State& state) {
  const auto pts = phase_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(par::identity_suite(system(), pts));
  state.counters["threads"] = par::max_threads();
}

void BM_residual_serial(benchmark::State& state) {
  const auto items = par::integrate_batch_serial(system(), initial_states(static_cast<std::size_t>(state.range(0))), 0, 10);
  std::vector<const Trajectory*> trs;
  for (const auto& it : items) trs.push_back(&*it.trajectory);
  for (auto _ : state) benchmark::DoNotOptimize(par::residual_batch_serial(system(), trs));
}

void BM_residual_parallel(benchmark::State& state) {
  const auto items = par::integrate_batch_serial(system(), initial_states(static_cast<std::size_t>(state.range(0))), 0, 10);
  std::vector<const Trajectory*> trs;
  for (const auto& it : items) trs.push_back(&*it.trajectory);
  for (auto _ : state) benchmark::DoNotOptimize(par::residual_batch(system(), trs));
  state.counters["threads"] = par::max_threads();
}

}  // namespace

BENCHMARK(BM_integrate_serial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_integrate_parallel)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_identity_serial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_identity_parallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_residual_serial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_residual_parallel)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
