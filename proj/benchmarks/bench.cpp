#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <vector>

#include "epcde/estimator.hpp"
#include "epcde/fourier.hpp"
#include "epcde/risk.hpp"
#include "epcde/stats.hpp"

namespace {

epcde::SamplePairs make_pairs(std::size_t n, bool unit_response) {
  epcde::stats::Rng rng(1234);
  epcde::SamplePairs d;
  for (std::size_t i = 0; i < n; ++i) {
    d.x.push_back(rng.uniform());
    d.y.push_back(unit_response
                      ? rng.uniform()
                      : epcde::stats::normal_quantile(0.999 * rng.uniform() + 0.0005));
  }
  return d;
}

void BM_FitSquare(benchmark::State& state) {
  const auto data = make_pairs(static_cast<std::size_t>(state.range(0)), true);
  for (auto _ : state) {
    auto f = epcde::fit(data, epcde::Loss::square);
    benchmark::DoNotOptimize(f.uni_weights);
  }
}
BENCHMARK(BM_FitSquare)->Arg(200)->Arg(1000)->Arg(5000);

void BM_FitLine(benchmark::State& state) {
  const auto data = make_pairs(static_cast<std::size_t>(state.range(0)), false);
  for (auto _ : state) {
    auto f = epcde::fit(data, epcde::Loss::line);
    benchmark::DoNotOptimize(f.uni_weights);
  }
}
BENCHMARK(BM_FitLine)->Arg(200)->Arg(1000)->Arg(5000);

void BM_EvaluateLine(benchmark::State& state) {
  const auto data = make_pairs(1000, false);
  const auto f = epcde::fit(data, epcde::Loss::line);
  double y = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(epcde::evaluate(f, y, 0.37));
    y = y >= 4.0 ? -4.0 : y + 0.01;
  }
}
BENCHMARK(BM_EvaluateLine);

void BM_InvertChar(benchmark::State& state) {
  epcde::CharSlice s;
  s.u_grid = epcde::char_u_grid(0.0, 25.0);
  for (double u : s.u_grid) s.values.push_back({std::exp(-0.5 * u * u), 0.0});
  double y = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(epcde::invert_char(s, y));
    y = y >= 3.0 ? 0.0 : y + 0.01;
  }
}
BENCHMARK(BM_InvertChar);

void BM_SolveEta(benchmark::State& state) {
  const auto cls = epcde::SmoothnessClass::sobolev(2, 2, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        epcde::solve_eta(cls, 1.0, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_SolveEta)->Arg(10000)->Arg(1000000);

}  // namespace

BENCHMARK_MAIN();
