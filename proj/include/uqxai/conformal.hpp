#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uqxai/core.hpp"

namespace uqxai {

/// Split-conformal threshold for adaptive prediction sets (APS).
struct ConformalCalibration {
  double qhat = 1.0;
  double alpha = 0.1;
  std::size_t n_cal = 0;
  std::size_t rank = 0;  // k = ceil((n_cal + 1)(1 - alpha)); rank > n_cal means clamped
  bool clamped = false;
  bool randomized = false;
};

struct PredictionSet {
  std::vector<int> members;  // sorted ascending
  std::size_t size() const { return members.size(); }
  bool contains(int label) const;
};

struct CoverageReport {
  double coverage = 0.0;
  double mean_size = 0.0;
  std::vector<std::size_t> size_histogram;  // index s = number of sets of size s, s in [0, K]
};

/// Class indices ordered by descending probability, ties to the lowest index.
std::vector<std::size_t> descending_order(std::span<const double> p);

/// Mass of classes ranked strictly before `label`, plus p[label] (or u * p[label]
/// when randomized).
double aps_score(std::span<const double> p, int label, bool randomized = false, double u = 1.0);

ConformalCalibration conformal_quantile(std::span<const double> scores, double alpha);

/// Adds classes in descending-probability order until cumulative mass reaches
/// qhat. The top-1 class is always included.
PredictionSet prediction_set(std::span<const double> p, const ConformalCalibration& cal);

/// Randomized APS set: class j joins while (mass ranked before j) + u * p[j]
/// stays <= qhat. The top-1 class is always included.
PredictionSet randomized_prediction_set(std::span<const double> p, const ConformalCalibration& cal,
                                        double u);

/// Calibration scores for every row; `u` values come from a seeded stream when
/// `randomized` is set.
std::vector<double> aps_scores(const ProbabilityMatrix& p, std::span<const int> labels,
                               bool randomized, std::uint64_t seed);

/// Deterministic sets, or randomized sets with one seeded draw per row when
/// `cal.randomized` is set.
std::vector<PredictionSet> prediction_sets(const ProbabilityMatrix& p,
                                           const ConformalCalibration& cal, std::uint64_t seed = 0);

CoverageReport coverage_report(std::span<const PredictionSet> sets, std::span<const int> labels,
                               std::size_t num_classes);

}  // namespace uqxai
