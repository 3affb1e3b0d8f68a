// Serial reference against the OpenMP kernels.

#include "krein/singular_forward.hpp"
#include "krein/stieltjes_forward.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace krein;

namespace {

StieltjesString random_string(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> logu(-1.0, 1.0);
  std::vector<Rational> lengths, masses;
  Rational total = 0;
  for (std::size_t j = 0; j <= n; ++j) {
    lengths.emplace_back(std::pow(10.0, logu(rng)));
    total += lengths.back();
  }
  for (std::size_t j = 0; j < n; ++j) masses.emplace_back(std::pow(10.0, logu(rng)));
  return StieltjesString(Interval(0, total), lengths, masses);
}

template <bool Parallel>
void BM_DirichletSpectrum(benchmark::State& state) {
  const auto view = numeric_view<Float<256>>(random_string(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    auto r = Parallel ? dirichlet_spectrum_parallel(view) : dirichlet_spectrum_serial(view);
    benchmark::DoNotOptimize(r.eigenvalues.data());
  }
}

template <bool Parallel>
void BM_SingularEigenvalues(benchmark::State& state) {
  const auto omega = density_fixture("power:alpha=1.5", Interval(0, 1));
  SingularOptions opts;
  opts.parallel = Parallel;
  for (auto _ : state) {
    auto r = eigenvalues_below(omega, static_cast<double>(state.range(0)), 1e-10, opts);
    benchmark::DoNotOptimize(r.eigenvalues.data());
  }
}

}  // namespace

BENCHMARK(BM_DirichletSpectrum<false>)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DirichletSpectrum<true>)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SingularEigenvalues<false>)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SingularEigenvalues<true>)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
