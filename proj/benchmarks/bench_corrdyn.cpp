#include <benchmark/benchmark.h>

#include "corrdyn/entropy.hpp"
#include "corrdyn/family.hpp"
#include "corrdyn/measures.hpp"
#include "corrdyn/random.hpp"

using namespace corrdyn;

namespace {

void BM_PolyRoots(benchmark::State& state) {
  SplitMix64 rng(7);
  std::vector<cplx> c;
  for (int k = 0; k <= state.range(0); ++k) c.emplace_back(rng.uniform() - 0.5, rng.uniform() - 0.5);
  c.back() = 1.0;
  const ComplexPolynomial p(std::move(c));
  for (auto _ : state) benchmark::DoNotOptimize(poly_roots(p));
}
BENCHMARK(BM_PolyRoots)->Arg(2)->Arg(5)->Arg(16);

void BM_ForwardFiber(benchmark::State& state) {
  const Correspondence f = make_Fa(FamilyParameterA::make(4.0));
  const SpherePoint z = SpherePoint::from_complex(cplx(0.3, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(forward(f, z));
}
BENCHMARK(BM_ForwardFiber);

void BM_EntropySmall(benchmark::State& state) {
  const Correspondence f = make_Fa(FamilyParameterA::make(4.0));
  EntropyProtocol p;
  p.eps_grid = {0.4, 0.2};
  p.n_max = static_cast<int>(state.range(0));
  p.seed_net = 8;
  for (auto _ : state) benchmark::DoNotOptimize(entropy_estimate(f, p));
}
BENCHMARK(BM_EntropySmall)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_PullbackTree(benchmark::State& state) {
  const Correspondence f = make_Fa(FamilyParameterA::make(4.0));
  const SpherePoint z = SpherePoint::from_complex(cplx(0.3, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(pullback_dirac_tree(f, z, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_PullbackTree)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
