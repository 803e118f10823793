#include <doctest.h>

#include <cmath>
#include <random>

#include "support/convert.hpp"
#include "support/naive.hpp"
#include "uqxai/calibration.hpp"
#include "uqxai/rng.hpp"

using namespace uqxai;

namespace {

struct Problem {
  LogitsMatrix z;
  LabelVector y;
  naive::Rows rows;
};

// Labels drawn from softmax(base); observed logits are c * base.
Problem simulated(std::uint64_t seed, std::size_t n, std::size_t k, double c) {
  Rng rng(seed);
  Matrix m(n, k);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> base(k);
    for (double& v : base) v = 2.0 * rng.normal();
    y[i] = static_cast<int>(rng.categorical(softmax(base)));
    for (std::size_t j = 0; j < k; ++j) m(i, j) = c * base[j];
  }
  return {LogitsMatrix(m), LabelVector(y, k), testing::to_rows(m)};
}

}  // namespace

TEST_CASE("nll examples") {
  Matrix conf(3, 3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) conf(i, i) = 60.0;
  CHECK(nll(LogitsMatrix(conf), LabelVector({0, 1, 2}, 3), 1.0) < 1e-20);

  const LogitsMatrix zero(Matrix(4, 6, 0.0));
  const LabelVector y({0, 1, 2, 5}, 6);
  for (double t : {0.05, 1.0, 20.0}) CHECK(std::fabs(nll(zero, y, t) - std::log(6.0)) < 1e-12);

  const auto p = simulated(1, 50, 4, 3.0);
  CHECK(std::fabs(nll(p.z, p.y, 1e6) - std::log(4.0)) < 1e-4);
}

TEST_CASE("nll matches the naive reference") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = simulated(s, 100, 5, 1.5);
    for (double t : {0.3, 1.0, 4.0}) {
      CHECK(std::fabs(nll(p.z, p.y, t) - naive::nll(p.rows, p.y.values(), t)) < 1e-12);
    }
  }
}

TEST_CASE("temperature recovery on simulated miscalibration") {
  for (double c : {0.5, 1.0, 2.0}) {
    const auto p = simulated(100 + static_cast<std::uint64_t>(c * 10), 5000, 6, c);
    const auto fit = fit_temperature(p.z, p.y);
    CHECK(std::fabs(fit.temperature - c) / c <= 0.10);
    CHECK(fit.nll_after <= fit.nll_before + 1e-12);
    const auto scan = naive::temperature_scan(p.rows, p.y.values());
    CHECK(fit.nll_after <= scan.second + 1e-3);
  }
}

TEST_CASE("fit never worsens nll and stays in range over 50 random instances") {
  std::mt19937_64 g(6);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = std::exp(std::uniform_real_distribution<double>(-1.5, 1.5)(g));
    const auto p = simulated(1000 + trial, 300, 3 + trial % 4, c);
    const auto fit = fit_temperature(p.z, p.y);
    CHECK(fit.temperature >= kMinTemperature);
    CHECK(fit.temperature <= kMaxTemperature);
    CHECK(fit.nll_after <= fit.nll_before + 1e-9);
    const auto scan = naive::temperature_scan(p.rows, p.y.values());
    CHECK(fit.nll_after <= scan.second + 1e-3);
    CHECK(fit.nll_after == doctest::Approx(nll(p.z, p.y, fit.temperature)).epsilon(1e-14));
  }
}

TEST_CASE("the search grid is geometric over the declared range") {
  const auto grid = temperature_grid();
  REQUIRE(grid.size() == kTemperatureGridPoints);
  CHECK(grid.front() == doctest::Approx(kMinTemperature).epsilon(1e-14));
  CHECK(grid.back() == doctest::Approx(kMaxTemperature).epsilon(1e-14));
  const double ratio = grid[1] / grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] / grid[i - 1] == doctest::Approx(ratio));
}

TEST_CASE("apply_temperature examples") {
  const auto p = simulated(3, 40, 5, 2.0);
  const auto one = apply_temperature(p.z, 1.0);
  for (std::size_t i = 0; i < 40; ++i) {
    const auto ref = softmax(p.z.row(i));
    for (std::size_t j = 0; j < 5; ++j) CHECK(one.row(i)[j] == ref[j]);
  }
  const auto hot = apply_temperature(p.z, 1e5);
  for (double v : hot.matrix().data) CHECK(std::fabs(v - 0.2) < 1e-3);
}

TEST_CASE("apply_temperature preserves the argmax over 1000 instances") {
  std::mt19937_64 g(12);
  std::normal_distribution<double> nd(0.0, 4.0);
  std::uniform_real_distribution<double> lt(std::log(0.05), std::log(20.0));
  for (int trial = 0; trial < 1000; ++trial) {
    Matrix m(3, 2 + trial % 7);
    for (double& v : m.data) v = nd(g);
    const LogitsMatrix z(m);
    for (double t : {0.1, 1.0, 10.0, std::exp(lt(g))}) {
      const auto p = apply_temperature(z, t);
      for (std::size_t i = 0; i < 3; ++i) CHECK(argmax(p.row(i)) == argmax(z.row(i)));
    }
  }
}

TEST_CASE("calibration set size guards") {
  const auto tiny = simulated(1, 9, 3, 1.0);
  CHECK_THROWS_AS(fit_temperature(tiny.z, tiny.y), ValidationError);
  const auto small = simulated(1, 50, 3, 1.0);
  CHECK_FALSE(fit_temperature(small.z, small.y).warnings.empty());
  const auto ok = simulated(1, 200, 3, 1.0);
  CHECK(fit_temperature(ok.z, ok.y).warnings.empty());
  CHECK_THROWS_AS(nll(ok.z, ok.y, 0.0), ValidationError);
}
