#include <benchmark/benchmark.h>

#include "bosonet/linalg.hpp"
#include "bosonet/mpo.hpp"
#include "bosonet/mps.hpp"
#include "bosonet/oracle.hpp"

using namespace bosonet;

namespace {

CircuitPlan haar(int m, std::uint64_t seed) {
  Rng rng(seed);
  return sample_haar_circuit(m, rng);
}

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const ComplexMatrix m = ComplexMatrix::Random(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(svd(m));
}
BENCHMARK(BM_Svd)->Arg(16)->Arg(64)->Arg(256);

void BM_Permanent(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const ComplexMatrix m = ComplexMatrix::Random(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(permanent(m));
}
BENCHMARK(BM_Permanent)->DenseRange(8, 16, 4);

void BM_MpsCircuit(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto plan = haar(m, 1);
  std::vector<int> occ(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < m / 4; ++j) occ[static_cast<std::size_t>(j)] = 1;
  for (auto _ : state) {
    auto mps = MpsState::init_fock(occ);
    benchmark::DoNotOptimize(mps.apply_circuit(plan, TruncationPolicy::with_chi(32)));
  }
}
BENCHMARK(BM_MpsCircuit)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MpoCircuit(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto plan = haar(m, 1);
  for (auto _ : state) {
    auto mpo = MpoState::init_lossy(m / 4, m, LossSpec::constant(0.5));
    benchmark::DoNotOptimize(mpo.apply_circuit(plan, TruncationPolicy::with_chi(32)));
  }
}
BENCHMARK(BM_MpoCircuit)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
