// Serial reference vs OpenMP kernels on uncertainty-sized workloads.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "uqxai/kernels.hpp"

namespace k = uqxai::kernels;

namespace {

constexpr std::size_t kClasses = 6;
constexpr std::size_t kPasses = 20;

std::vector<double> uniform(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = ud(g);
  return v;
}

std::vector<double> simplex_rows(std::size_t rows, std::uint64_t seed) {
  auto v = uniform(rows * kClasses, seed);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < kClasses; ++j) s += v[r * kClasses + j];
    for (std::size_t j = 0; j < kClasses; ++j) v[r * kClasses + j] /= s;
  }
  return v;
}

template <auto Fn>
void softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = uniform(n * kClasses, 1);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    Fn(in, kClasses, 0.5, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <auto Fn>
void nll(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = uniform(n * kClasses, 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % kClasses);
  std::vector<double> out(n);
  for (auto _ : state) {
    Fn(in, labels, kClasses, 0.5, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <auto Fn>
void pass_entropy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto probs = simplex_rows(kPasses * n, 3);
  std::vector<double> out(n);
  for (auto _ : state) {
    Fn(probs, kPasses, n, kClasses, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <auto Fn>
void pixel_stats(benchmark::State& state) {
  const auto pixels = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t d = 10;
  const auto maps = uniform(d * pixels, 4);
  std::vector<double> mean(pixels), var(pixels);
  for (auto _ : state) {
    Fn(maps, d, pixels, mean, var);
    benchmark::DoNotOptimize(var.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pixels));
}

}  // namespace

BENCHMARK(softmax<k::serial::softmax_rows>)->Name("softmax_rows/serial")->Arg(5000)->Arg(100000);
BENCHMARK(softmax<k::softmax_rows>)->Name("softmax_rows/omp")->Arg(5000)->Arg(100000);
BENCHMARK(nll<k::serial::nll_terms>)->Name("nll_terms/serial")->Arg(5000)->Arg(100000);
BENCHMARK(nll<k::nll_terms>)->Name("nll_terms/omp")->Arg(5000)->Arg(100000);
BENCHMARK(pass_entropy<k::serial::mean_pass_entropy>)->Name("mean_pass_entropy/serial")->Arg(5000)->Arg(50000);
BENCHMARK(pass_entropy<k::mean_pass_entropy>)->Name("mean_pass_entropy/omp")->Arg(5000)->Arg(50000);
BENCHMARK(pixel_stats<k::serial::pixel_mean_variance>)->Name("pixel_mean_variance/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(pixel_stats<k::pixel_mean_variance>)->Name("pixel_mean_variance/omp")->Arg(1 << 16)->Arg(1 << 20);

BENCHMARK_MAIN();
