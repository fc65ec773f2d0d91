// Microbenchmarks for the hot paths: the dense assignment solver, the
// network-simplex style transport solve, residual accumulation, grid
// synthesis, and the viscous flow. Sizes mirror what the experiments use.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "matchlab/domain.hpp"
#include "matchlab/fields.hpp"
#include "matchlab/harness.hpp"
#include "matchlab/hjb.hpp"
#include "matchlab/rng.hpp"
#include "matchlab/spectral.hpp"
#include "matchlab/transport.hpp"

namespace {

using namespace matchlab;

std::vector<double> random_cost(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (double& c : cost) c = rng.next_double();
  return cost;
}

void BM_ExactAssignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::vector<double> cost = random_cost(n, 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_assignment(cost, n).total_cost);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_ExactAssignment)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_BipartiteMatch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const DomainGeometry dom(DomainKind::Torus2);
  Rng rng = Rng::from_key(42, 1, static_cast<std::uint64_t>(n), 0);
  const EmpiricalSample a = draw_sample(dom, static_cast<std::size_t>(n), rng);
  const EmpiricalSample b = draw_sample(dom, static_cast<std::size_t>(n), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(w2_bipartite(a, b).cost);
  }
}
BENCHMARK(BM_BipartiteMatch)->RangeMultiplier(4)->Range(64, 1024);

void BM_GridTransport(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const DomainGeometry dom(DomainKind::Torus2);
  const std::vector<Point> cells = quadrature_grid(dom, k).nodes;
  Rng rng(7);
  DiscreteMeasure mu{cells, {}}, nu{cells, {}};
  double total = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    mu.mass.push_back(0.5 + rng.next_double());
    total += mu.mass.back();
  }
  for (double& w : mu.mass) w /= total;
  nu.mass.assign(cells.size(), 1.0 / static_cast<double>(cells.size()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(w2_discrete(dom, mu, nu).cost);
  }
}
BENCHMARK(BM_GridTransport)->Arg(16)->Arg(32);

void BM_ResidualAccumulate(benchmark::State& state) {
  const DomainGeometry dom(DomainKind::Torus2);
  const auto basis = std::make_shared<SpectralBasis>(build_basis(dom, 10));
  Rng rng(3);
  const EmpiricalSample a = draw_sample(dom, 256, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(residual_coefficients(a, basis).values.size());
  }
}
BENCHMARK(BM_ResidualAccumulate);

void BM_Synthesize(benchmark::State& state) {
  const DomainGeometry dom(DomainKind::Torus2);
  const auto basis = std::make_shared<SpectralBasis>(build_basis(dom, 10));
  Rng rng(4);
  const EmpiricalSample a = draw_sample(dom, 256, rng);
  const SpectralCoefficients rs =
      heat_smooth(residual_coefficients(a, basis), 0.02);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize(rs, 96).values.back());
  }
}
BENCHMARK(BM_Synthesize);

void BM_HopfColeFlow(benchmark::State& state) {
  const DomainGeometry dom(DomainKind::Torus2);
  SpectralCoefficients h = named_field(dom, "mix");
  for (double& v : h.values) v *= 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hopf_cole_flow(h, 0.05, 1.0).phi.values.back());
  }
}
BENCHMARK(BM_HopfColeFlow);

}  // namespace

// The stock benchmark_main archive shipped on some toolchains carries stale
// LTO bytecode, so the entry point is expanded here instead.
BENCHMARK_MAIN();
