#include <doctest.h>

#include <cmath>
#include <random>

#include "support/naive.hpp"
#include "uqxai/uncertainty.hpp"

using namespace uqxai;

namespace {

PassStack stack_of(const std::vector<std::vector<double>>& passes_for_one_sample) {
  const std::size_t t = passes_for_one_sample.size();
  const std::size_t k = passes_for_one_sample.front().size();
  Tensor3 s(t, 1, k);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < k; ++j) s(i, 0, j) = passes_for_one_sample[i][j];
  }
  return PassStack(s, PassKind::kProbabilities);
}

}  // namespace

TEST_CASE("predictive entropy examples") {
  CHECK(std::fabs(predictive_entropy(std::vector<double>(6, 1.0 / 6.0)) - std::log(6.0)) < 1e-12);
  CHECK(predictive_entropy(std::vector<double>{0.0, 1.0, 0.0}) == 0.0);
  CHECK(std::fabs(predictive_entropy(std::vector<double>{0.5, 0.5, 0, 0, 0, 0}) - std::log(2.0)) < 1e-15);
}

TEST_CASE("mutual information examples") {
  CHECK(mutual_information(stack_of({{0.2, 0.8}, {0.2, 0.8}, {0.2, 0.8}}))[0] == 0.0);
  CHECK(std::fabs(mutual_information(stack_of({{1.0, 0.0}, {0.0, 1.0}}))[0] - std::log(2.0)) < 1e-15);
  CHECK(mutual_information(stack_of({{0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}}))[0] == 0.0);
}

TEST_CASE("disagreement examples") {
  CHECK(disagreement(stack_of({{0.6, 0.4}, {0.9, 0.1}}))[0] == 0.0);
  CHECK(disagreement(stack_of({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}))[0] == 0.5);
  CHECK(disagreement(stack_of({{1, 0}, {0, 1}}))[0] == 0.5);
}

TEST_CASE("evidential mapping examples") {
  const auto a = evidential_map(Matrix(1, 6, 1.0));
  CHECK(a.u_mass[0] == 1.0);
  for (double b : a.belief.data) CHECK(b == 0.0);
  for (double p : a.expected_p.row(0)) CHECK(p == doctest::Approx(1.0 / 6.0).epsilon(1e-15));

  const auto b = evidential_map(Matrix(1, 3, {4.0, 1.0, 1.0}));
  CHECK(b.belief.data == std::vector<double>{0.5, 0.0, 0.0});
  CHECK(b.u_mass[0] == 0.5);
  CHECK(b.expected_p.row(0)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(b.expected_p.row(0)[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));

  const auto c = evidential_map(Matrix(1, 2, {11.0, 1.0}));
  CHECK(c.u_mass[0] == doctest::Approx(2.0 / 12.0).epsilon(1e-15));
  CHECK(c.belief(0, 0) == doctest::Approx(10.0 / 12.0).epsilon(1e-15));
  CHECK(c.belief(0, 1) == 0.0);

  CHECK_THROWS_AS(evidential_map(Matrix(1, 2, {0.5, 2.0})), ValidationError);
}

TEST_CASE("normalize_uncertainty examples") {
  const double l6 = std::log(6.0);
  const auto u = normalize_uncertainty(std::vector<double>{l6, 0.0, 0.5 * l6}, 6);
  CHECK(u[0] == 1.0);
  CHECK(u[1] == 0.0);
  CHECK(u[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("1000 random stacks: 0 <= MI <= H(mean) and H <= ln K") {
  std::mt19937_64 g(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t t = 1 + trial % 8, n = 4, k = 2 + trial % 5;
    Tensor3 s(t, n, k);
    for (std::size_t p = 0; p < t; ++p) {
      const auto rows = naive::random_simplex(g, n, k, 1.0 + trial % 3);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) s(p, i, j) = rows[i][j];
      }
    }
    const PassStack stack(s, PassKind::kProbabilities);
    const auto scores = uncertainty_scores(stack);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(scores.entropy[i] >= 0.0);
      CHECK(scores.entropy[i] <= std::log(static_cast<double>(k)) + 1e-12);
      CHECK(scores.mutual_information[i] >= 0.0);
      CHECK(scores.mutual_information[i] <= scores.entropy[i] + 1e-9);
      CHECK(scores.disagreement[i] >= 0.0);
      CHECK(scores.disagreement[i] <= 1.0);
      CHECK(scores.normalized[i] >= 0.0);
      CHECK(scores.normalized[i] <= 1.0);
    }
  }
}

TEST_CASE("evidential masses sum to one and keep the argmax") {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> ud(1.0, 40.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Matrix alpha(1, 2 + trial % 6);
    for (double& v : alpha.data) v = ud(g);
    const auto e = evidential_map(alpha);
    double s = e.u_mass[0];
    for (double b : e.belief.data) s += b;
    CHECK(std::fabs(s - 1.0) < 1e-9);

    const std::size_t k = static_cast<std::size_t>(trial) % alpha.cols;
    Matrix onehot(1, alpha.cols, 1.0);
    onehot(0, k) += 0.001 + ud(g);
    CHECK(argmax(evidential_map(onehot).expected_p.row(0)) == k);
  }
}

TEST_CASE("disagreement is zero exactly when all per-pass argmaxes agree") {
  std::mt19937_64 g(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t t = 2 + trial % 4;
    const auto rows = naive::random_simplex(g, t, 3, 0.7);
    Tensor3 s(t, 1, 3);
    bool same = true;
    std::size_t first = 0;
    for (std::size_t p = 0; p < t; ++p) {
      for (std::size_t j = 0; j < 3; ++j) s(p, 0, j) = rows[p][j];
      const std::size_t a = argmax(rows[p]);
      if (p == 0) first = a;
      same = same && a == first;
    }
    const double d = disagreement(PassStack(s, PassKind::kProbabilities))[0];
    CHECK((d == 0.0) == same);
  }
}

TEST_CASE("logit stacks are softmaxed per pass") {
  Tensor3 z(2, 1, 3, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  const PassStack s(z, PassKind::kLogits);
  CHECK(std::fabs(uncertainty_scores(s).normalized[0] - 1.0) < 1e-12);
  CHECK(mutual_information(s)[0] == 0.0);
}
