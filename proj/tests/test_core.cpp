#include <doctest.h>

#include <cmath>
#include <random>

#include "support/convert.hpp"
#include "support/naive.hpp"
#include "uqxai/core.hpp"

using namespace uqxai;

TEST_CASE("softmax of zeros is uniform") {
  const auto p = softmax(std::vector<double>(6, 0.0));
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("softmax dominance limit") {
  const auto p = softmax(std::vector<double>{100.0, 0.0, 0.0});
  CHECK(1.0 - p[0] < 1e-40);
  CHECK(p[1] < 1e-40);
  CHECK(p[2] < 1e-40);
}

TEST_CASE("softmax is shift invariant") {
  std::mt19937_64 g(11);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> z(5), zs(5);
    for (std::size_t k = 0; k < 5; ++k) {
      z[k] = nd(g);
      zs[k] = z[k] + 17.3;
    }
    const auto a = softmax(z);
    const auto b = softmax(zs);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::fabs(a[k] - b[k]) < 1e-14);
  }
}

TEST_CASE("softmax sums to one and keeps the argmax over 1000 random vectors") {
  std::mt19937_64 g(5);
  std::normal_distribution<double> nd(0.0, 5.0);
  std::uniform_int_distribution<int> kd(2, 12);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> z(static_cast<std::size_t>(kd(g)));
    for (double& v : z) v = nd(g);
    const auto p = softmax(z);
    double s = 0.0;
    for (double v : p) s += v;
    CHECK(std::fabs(s - 1.0) < 1e-9);
    CHECK(argmax(p) == argmax(z));
  }
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax(std::vector<double>{0.2, 0.4, 0.4}) == 1);
  CHECK(argmax(std::vector<double>{0.5, 0.5}) == 0);
}

TEST_CASE("normalize_map examples") {
  const SaliencyMap m(Matrix(2, 2, {0.0, 2.0, 4.0, 8.0}), false);
  const SaliencyMap n = normalize_map(m);
  CHECK(n.values().data == std::vector<double>{0.0, 0.25, 0.5, 1.0});
  CHECK(n.normalized());

  const SaliencyMap c = normalize_map(SaliencyMap(Matrix(3, 3, 5.0), false));
  for (double v : c.values().data) CHECK(v == 0.0);

  const Matrix unit(2, 3, {0.0, 0.3, 1.0, 0.5, 0.25, 0.75});
  CHECK(normalize_map(SaliencyMap(unit, false)).values() == unit);
}

TEST_CASE("normalize_map is idempotent") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> ud(-4.0, 9.0);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix m(4, 5);
    for (double& v : m.data) v = ud(g);
    const SaliencyMap once = normalize_map(SaliencyMap(m, false));
    const SaliencyMap twice = normalize_map(once);
    CHECK(once.values() == twice.values());
  }
}

TEST_CASE("mean_probability examples") {
  Tensor3 one(1, 2, 3, {0.2, 0.3, 0.5, 0.1, 0.1, 0.8});
  CHECK(mean_probability(PassStack(one, PassKind::kProbabilities)).matrix().data == one.data);

  Tensor3 two(2, 1, 2, {1.0, 0.0, 0.0, 1.0});
  const auto m = mean_probability(PassStack(two, PassKind::kProbabilities));
  CHECK(m.row(0)[0] == 0.5);
  CHECK(m.row(0)[1] == 0.5);
}

TEST_CASE("mean_probability rows sum to one and identical slices reproduce exactly") {
  std::mt19937_64 g(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 1 + trial % 7;
    const auto slice = naive::random_simplex(g, 8, 4);
    Tensor3 same(t, 8, 4);
    Tensor3 rnd(t, 8, 4);
    for (std::size_t p = 0; p < t; ++p) {
      const auto other = naive::random_simplex(g, 8, 4);
      for (std::size_t n = 0; n < 8; ++n) {
        for (std::size_t k = 0; k < 4; ++k) {
          same(p, n, k) = slice[n][k];
          rnd(p, n, k) = other[n][k];
        }
      }
    }
    const auto ms = mean_probability(PassStack(same, PassKind::kProbabilities));
    CHECK(ms.matrix() == testing::to_matrix(slice));
    const auto mr = mean_probability(PassStack(rnd, PassKind::kProbabilities));
    for (std::size_t n = 0; n < 8; ++n) {
      double s = 0.0;
      for (double v : mr.row(n)) s += v;
      CHECK(std::fabs(s - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("probability ingestion validates and renormalizes") {
  CHECK_THROWS_AS(ProbabilityMatrix::ingest(Matrix(1, 2, {0.6, 0.6})), ValidationError);
  CHECK_THROWS_AS(ProbabilityMatrix::ingest(Matrix(1, 2, {1.2, -0.2})), ValidationError);
  CHECK_THROWS_AS(ProbabilityMatrix::ingest(Matrix(1, 1, {1.0})), ValidationError);
  const auto p = ProbabilityMatrix::ingest(Matrix(1, 2, {0.3 + 4e-7, 0.7}));
  CHECK(p.row(0)[0] + p.row(0)[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("logits, stacks and labels reject invalid shapes and values") {
  CHECK_THROWS_AS(LogitsMatrix(Matrix(1, 2, {0.0, NAN})), ValidationError);
  CHECK_THROWS_AS(LogitsMatrix(Matrix(0, 3)), ValidationError);
  CHECK_THROWS_AS(PassStack(Tensor3(0, 2, 2), PassKind::kLogits), ValidationError);
  CHECK_THROWS_AS(PassStack(Tensor3(1, 1, 2, {0.9, 0.3}), PassKind::kProbabilities),
                  ValidationError);
  CHECK_THROWS_AS(LabelVector({0, 3}, 3), ValidationError);
  CHECK_THROWS_AS(LabelVector({-1}, 3), ValidationError);
  CHECK_THROWS_AS(SaliencyMap(Matrix(1, 2, {0.5, 1.5}), true), ValidationError);
  CHECK_NOTHROW(SaliencyMap(Matrix(1, 2, {0.5, 1.5}), false));
}
