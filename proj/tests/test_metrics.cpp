#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support/convert.hpp"
#include "support/naive.hpp"
#include "uqxai/metrics.hpp"

using namespace uqxai;

namespace {

ProbabilityMatrix rows_with_top(std::size_t n, double top, std::size_t k) {
  Matrix m(n, k, (1.0 - top) / static_cast<double>(k - 1));
  for (std::size_t i = 0; i < n; ++i) m(i, 0) = top;
  return ProbabilityMatrix::ingest(m);
}

}  // namespace

TEST_CASE("ECE is zero for constructed perfect calibration") {
  const auto p = rows_with_top(10, 0.6, 3);
  const LabelVector y({0, 0, 0, 0, 0, 0, 1, 2, 1, 2}, 3);
  CHECK(ece(p, y).ece < 1e-15);
}

TEST_CASE("ECE is one for confident wrong predictions") {
  Matrix m(5, 2, 0.0);
  for (std::size_t i = 0; i < 5; ++i) m(i, 0) = 1.0;
  CHECK(ece(ProbabilityMatrix::ingest(m), LabelVector({1, 1, 1, 1, 1}, 2)).ece == 1.0);
}

TEST_CASE("ECE matches the two-pass oracle on 100 random instances") {
  std::mt19937_64 g(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) * 2, k = 2 + trial % 6;
    const auto p = testing::to_probs(naive::random_simplex(g, n, k, 1.0 + trial % 3));
    const auto rows = testing::to_rows(p.matrix());
    auto y = naive::random_labels(g, n, k);
    const std::size_t bins = trial % 4 == 0 ? 10 : 15;
    const auto got = ece(p, LabelVector(y, k), bins);
    const auto ref = naive::ece(rows, y, bins);
    CHECK(std::fabs(got.ece - ref.ece) <= 1e-12);
    for (std::size_t b = 0; b < bins; ++b) {
      CHECK(got.bins.count[b] == ref.count[b]);
      CHECK(got.bins.accuracy[b].has_value() == (ref.count[b] > 0));
      if (ref.count[b] > 0) {
        CHECK(std::fabs(*got.bins.accuracy[b] - ref.accuracy[b]) <= 1e-12);
        CHECK(std::fabs(*got.bins.mean_confidence[b] - ref.mean_confidence[b]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("ECE bins are closed on the left and the last bin is closed on the right") {
  Matrix m(3, 2);
  m(0, 0) = 0.6, m(0, 1) = 0.4;
  m(1, 0) = 1.0, m(1, 1) = 0.0;
  m(2, 0) = 0.5, m(2, 1) = 0.5;
  const auto r = ece(ProbabilityMatrix::ingest(m), LabelVector({0, 0, 0}, 2), 10);
  CHECK(r.bins.count[6] == 1);
  CHECK(r.bins.count[9] == 1);
  CHECK(r.bins.count[5] == 1);
  CHECK_FALSE(r.bins.accuracy[0].has_value());
}

TEST_CASE("Brier examples") {
  Matrix hot(4, 3, 0.0);
  for (std::size_t i = 0; i < 4; ++i) hot(i, i % 3) = 1.0;
  const auto p = ProbabilityMatrix::ingest(hot);
  CHECK(brier(p, LabelVector({0, 1, 2, 0}, 3)) == 0.0);
  CHECK(brier(p, LabelVector({1, 2, 0, 1}, 3)) == 2.0);
  const auto u = ProbabilityMatrix::ingest(Matrix(7, 6, 1.0 / 6.0));
  CHECK(std::fabs(brier(u, LabelVector({0, 1, 2, 3, 4, 5, 0}, 6)) - 5.0 / 6.0) < 1e-12);
}

TEST_CASE("Brier matches the naive reference on 100 random instances") {
  std::mt19937_64 g(32);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) * 2, k = 2 + trial % 6;
    const auto p = testing::to_probs(naive::random_simplex(g, n, k));
    const auto y = naive::random_labels(g, n, k);
    CHECK(std::fabs(brier(p, LabelVector(y, k)) - naive::brier(testing::to_rows(p.matrix()), y)) <= 1e-12);
  }
}

TEST_CASE("classification report examples") {
  Matrix hot(4, 2, 0.0);
  hot(0, 0) = hot(1, 1) = hot(2, 0) = hot(3, 1) = 1.0;
  const auto perfect = classification_report(ProbabilityMatrix::ingest(hot), LabelVector({0, 1, 0, 1}, 2));
  CHECK(perfect.macro_f1 == 1.0);
  CHECK(perfect.confusion == std::vector<std::vector<std::size_t>>{{2, 0}, {0, 2}});

  Matrix zero(4, 2, 0.0);
  for (std::size_t i = 0; i < 4; ++i) zero(i, 0) = 1.0;
  const auto r = classification_report(ProbabilityMatrix::ingest(zero), LabelVector({0, 0, 1, 1}, 2));
  // Class 0: precision 1/2, recall 1, F1 2/3. Class 1: F1 0.
  CHECK(r.per_class_f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.per_class_f1[1] == 0.0);
  CHECK(r.macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(*r.per_class_sensitivity[0] == 1.0);
  CHECK(*r.per_class_specificity[0] == 0.0);
  CHECK(r.top1_accuracy == 0.5);
}

TEST_CASE("absent classes are excluded from macro F1 with a warning") {
  Matrix m(2, 3, 0.0);
  m(0, 0) = m(1, 1) = 1.0;
  const auto r = classification_report(ProbabilityMatrix::ingest(m), LabelVector({0, 1}, 3));
  CHECK(r.macro_f1 == 1.0);
  CHECK_FALSE(r.per_class_sensitivity[2].has_value());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("metric ranges and confusion partition over 1000 random instances") {
  std::mt19937_64 g(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 40, k = 2 + trial % 5;
    const auto p = testing::to_probs(naive::random_simplex(g, n, k));
    const LabelVector y(naive::random_labels(g, n, k), k);
    const double e = ece(p, y).ece;
    const double b = brier(p, y);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    CHECK(b >= 0.0);
    CHECK(b <= 2.0);
    const auto r = classification_report(p, y);
    std::size_t total = 0;
    for (const auto& row : r.confusion) {
      for (std::size_t c : row) total += c;
    }
    CHECK(total == n);
    CHECK(r.macro_f1 >= 0.0);
    CHECK(r.macro_f1 <= 1.0);
    for (const auto& s : r.per_class_sensitivity) {
      if (s) CHECK((*s >= 0.0 && *s <= 1.0));
    }
    for (const auto& s : r.per_class_specificity) {
      if (s) CHECK((*s >= 0.0 && *s <= 1.0));
    }
  }
}

TEST_CASE("ECE is invariant to sample order") {
  std::mt19937_64 g(34);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 60, k = 4;
    auto rows = naive::random_simplex(g, n, k);
    auto y = naive::random_labels(g, n, k);
    const double before = ece(testing::to_probs(rows), LabelVector(y, k)).ece;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), g);
    naive::Rows r2(n);
    std::vector<int> y2(n);
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = rows[perm[i]];
      y2[i] = y[perm[i]];
    }
    CHECK(std::fabs(ece(testing::to_probs(r2), LabelVector(y2, k)).ece - before) < 1e-12);
  }
}

TEST_CASE("stratified report examples and pooling identities") {
  Matrix hot(4, 2, 0.0);
  hot(0, 0) = hot(1, 1) = hot(2, 0) = hot(3, 0) = 1.0;
  const auto p = ProbabilityMatrix::ingest(hot);
  const LabelVector y({0, 1, 0, 1}, 2);
  const auto s = stratified_report(p, y, {"a", "a", "b", "b"});
  CHECK(s.groups.at("a").classification.top1_accuracy == 1.0);
  CHECK(s.groups.at("b").classification.top1_accuracy == 0.5);
  CHECK(s.groups.at("a").low_support);

  const auto single = stratified_report(p, y, {"x", "x", "x", "x"});
  const auto pooled = classification_report(p, y);
  CHECK(single.groups.at("x").classification.confusion == pooled.confusion);
  CHECK(single.groups.at("x").classification.macro_f1 == pooled.macro_f1);
  CHECK(single.groups.at("x").ece.ece == ece(p, y).ece);
  CHECK(single.groups.at("x").brier == brier(p, y));

  std::mt19937_64 g(35);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 50, k = 3;
    const auto probs = testing::to_probs(naive::random_simplex(g, n, k));
    const LabelVector labels(naive::random_labels(g, n, k), k);
    std::vector<std::string> groups(n);
    for (auto& gk : groups) gk = std::string(1, static_cast<char>('a' + g() % 4));
    const auto strat = stratified_report(probs, labels, groups);
    const auto all = classification_report(probs, labels);
    double weighted = 0.0;
    std::vector<std::vector<std::size_t>> merged(k, std::vector<std::size_t>(k, 0));
    for (const auto& [key, gr] : strat.groups) {
      weighted += gr.classification.top1_accuracy * static_cast<double>(gr.n) / static_cast<double>(n);
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) merged[a][b] += gr.classification.confusion[a][b];
      }
    }
    CHECK(std::fabs(weighted - all.top1_accuracy) < 1e-12);
    CHECK(merged == all.confusion);
  }
}
