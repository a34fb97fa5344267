#include <benchmark/benchmark.h>

#include <random>

#include "kdecay/kernels.hpp"
#include "kdecay/pole_tree.hpp"
#include "kdecay/quadrature.hpp"

using namespace kdecay;

namespace {

std::vector<PoleTerm> scattered_terms(std::size_t n, double radius) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PoleTerm> terms(n);
  for (auto& t : terms) t = {complex(u(rng) - 0.5, u(rng) - 0.5), std::polar(radius * u(rng), 6.283185307179586 * u(rng))};
  return terms;
}

void certified_K2(benchmark::State& state) {
  const auto fam = SequenceFamily::reciprocal(1.0);
  const complex z(37.3, 11.2);
  const double tol = std::pow(10.0, -double(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval_K2(fam, z, tol));
}
BENCHMARK(certified_K2)->Arg(6)->Arg(10)->Arg(13);

void direct_sum(benchmark::State& state) {
  const auto terms = scattered_terms(std::size_t(state.range(0)), 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(eval_partial(terms, complex(50.0, 20.0), 2));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(direct_sum)->RangeMultiplier(8)->Range(64, 1 << 15)->Complexity();

void tree_evaluate(benchmark::State& state) {
  const auto terms = scattered_terms(std::size_t(state.range(0)), 100.0);
  const PoleTree tree(terms);
  const auto at = CirclePoint::at(complex(50.0, 20.0));
  for (auto _ : state) benchmark::DoNotOptimize(tree.evaluate(at, 2));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(tree_evaluate)->RangeMultiplier(8)->Range(64, 1 << 15)->Complexity();

void abs_power_integral(benchmark::State& state) {
  const double r = double(state.range(0)) + 0.5;
  const KernelField field(SequenceFamily::reciprocal(1.0), ModulusRange::everything(), 2, 4.0 * r);
  const auto bps = pole_breakpoints(field.terms(), r);
  for (auto _ : state) benchmark::DoNotOptimize(circle_abs_power(field.function(), r, 0.3, bps));
}
BENCHMARK(abs_power_integral)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
