#include <benchmark/benchmark.h>

#include "dmabf/beamform.hpp"
#include "dmabf/harness.hpp"

namespace {

using namespace dmabf;

ScenarioInstance desk_instance(int k, double dx_over_lambda, Architecture arch, int realization = 0) {
  ScenarioConfig cfg;
  cfg.k = k;
  cfg.r_min = 6.0;
  cfg.d_x_over_lambda = dx_over_lambda;
  const auto users = draw_users(cfg, realization);
  const ArrayGeometry geometry = cfg.dma_geometry();
  ScenarioInstance inst;
  inst.architecture = arch;
  for (int i = 0; i < k; ++i) inst.channels.push_back(channel_vector(geometry, users[i], cfg.wavelength(), i).entries);
  inst.targets = RealVector::Constant(k, sinr_target_from_rate(cfg.r_min));
  inst.noise_powers = RealVector::Constant(k, dbm_to_watts(cfg.noise_dbm));
  if (arch != Architecture::kFd) inst.dma.emplace(geometry);
  return inst;
}

void BM_HermitianEig(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const ComplexMatrix a = ComplexMatrix::Random(n, n);
  const ComplexMatrix h = a + a.adjoint();
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eig(h));
}
BENCHMARK(BM_HermitianEig)->Arg(16)->Arg(36)->Arg(64);

void BM_FdSdp(benchmark::State& state) {
  const auto inst = desk_instance(static_cast<int>(state.range(0)), 0.5, Architecture::kFd);
  const SdpProblem p = detail::fd_problem(inst);
  for (auto _ : state) benchmark::DoNotOptimize(solve_sdp(p));
}
BENCHMARK(BM_FdSdp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SolveDma(benchmark::State& state) {
  const double dx = 1.0 / static_cast<double>(state.range(0));
  const auto inst = desk_instance(2, dx, Architecture::kDma);
  for (auto _ : state) benchmark::DoNotOptimize(solve_dma(inst));
}
BENCHMARK(BM_SolveDma)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_LorentzianMap(benchmark::State& state) {
  CounterRng rng = CounterRng::stream(7, 0);
  ComplexVector q(36);
  for (auto& v : q) v = rng.complex_normal();
  for (auto _ : state) benchmark::DoNotOptimize(map_to_lorentzian(q, 4, 9));
}
BENCHMARK(BM_LorentzianMap);

}  // namespace
BENCHMARK_MAIN();
