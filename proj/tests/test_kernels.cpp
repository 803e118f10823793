#include <doctest.h>

#include <omp.h>

#include <random>
#include <vector>

#include "uqxai/kernels.hpp"

using namespace uqxai;

namespace {

std::vector<double> random_values(std::mt19937_64& g, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> ud(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = ud(g);
  return v;
}

std::vector<double> to_simplex(std::vector<double> v, std::size_t k) {
  for (std::size_t r = 0; r < v.size() / k; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += v[r * k + j];
    for (std::size_t j = 0; j < k; ++j) v[r * k + j] /= s;
  }
  return v;
}

// Runs the parallel kernels at several thread counts; every result must be
// bit-identical to the serial reference.
template <typename F>
void for_thread_counts(F&& f) {
  for (int threads : {1, 2, 4, 7}) {
    omp_set_num_threads(threads);
    f();
  }
}

}  // namespace

TEST_CASE("parallel softmax and nll kernels match the serial reference bit for bit") {
  std::mt19937_64 g(1);
  const std::size_t n = 1001, k = 6;
  const auto z = random_values(g, n * k, -8.0, 8.0);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % k);
  std::vector<double> ref(n * k), ref_nll(n);
  kernels::serial::softmax_rows(z, k, 1.0 / 1.7, ref);
  kernels::serial::nll_terms(z, y, k, 1.0 / 1.7, ref_nll);
  for_thread_counts([&] {
    std::vector<double> out(n * k), out_nll(n);
    kernels::softmax_rows(z, k, 1.0 / 1.7, out);
    kernels::nll_terms(z, y, k, 1.0 / 1.7, out_nll);
    CHECK(out == ref);
    CHECK(out_nll == ref_nll);
  });
}

TEST_CASE("parallel pass kernels match the serial reference bit for bit") {
  std::mt19937_64 g(2);
  const std::size_t t = 9, n = 513, k = 5;
  const auto p = to_simplex(random_values(g, t * n * k, 0.0, 1.0), k);
  std::vector<double> ref_mean(n * k), ref_h(n), ref_mh(n);
  kernels::serial::mean_over_passes(p, t, n, k, ref_mean);
  kernels::serial::row_entropy(ref_mean, k, ref_h);
  kernels::serial::mean_pass_entropy(p, t, n, k, ref_mh);
  for_thread_counts([&] {
    std::vector<double> mean(n * k), h(n), mh(n);
    kernels::mean_over_passes(p, t, n, k, mean);
    kernels::row_entropy(mean, k, h);
    kernels::mean_pass_entropy(p, t, n, k, mh);
    CHECK(mean == ref_mean);
    CHECK(h == ref_h);
    CHECK(mh == ref_mh);
  });
}

TEST_CASE("parallel pixel statistics match the serial reference bit for bit") {
  std::mt19937_64 g(3);
  for (std::size_t d : {1u, 2u, 10u}) {
    const std::size_t pixels = 64 * 64;
    const auto maps = random_values(g, d * pixels, 0.0, 1.0);
    std::vector<double> ref_m(pixels), ref_v(pixels);
    kernels::serial::pixel_mean_variance(maps, d, pixels, ref_m, ref_v);
    for_thread_counts([&] {
      std::vector<double> m(pixels), v(pixels);
      kernels::pixel_mean_variance(maps, d, pixels, m, v);
      CHECK(m == ref_m);
      CHECK(v == ref_v);
    });
    if (d == 1) {
      for (double v : ref_v) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("ordered_sum adds in index order") {
  const std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(kernels::ordered_sum(v) == ((1e16 + 1.0) - 1e16) + 1.0);
}
