#include "uqxai/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "uqxai/log.hpp"
#include "uqxai/rng.hpp"

namespace uqxai {

bool PredictionSet::contains(int label) const {
  return std::binary_search(members.begin(), members.end(), label);
}

std::vector<std::size_t> descending_order(std::span<const double> p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  return order;
}

double aps_score(std::span<const double> p, int label, bool randomized, double u) {
  if (label < 0 || static_cast<std::size_t>(label) >= p.size()) {
    throw ValidationError("APS label " + std::to_string(label) + " outside [0, " +
                          std::to_string(p.size()) + ")");
  }
  if (randomized && !(u >= 0.0 && u <= 1.0)) {
    throw ValidationError("APS randomization draw must lie in [0,1]");
  }
  double before = 0.0;
  for (std::size_t idx : descending_order(p)) {
    if (static_cast<int>(idx) == label) break;
    before += p[idx];
  }
  const double own = p[static_cast<std::size_t>(label)];
  return std::min(1.0, before + (randomized ? u * own : own));
}

ConformalCalibration conformal_quantile(std::span<const double> scores, double alpha) {
  if (scores.empty()) throw ValidationError("conformal calibration needs at least one score");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
  ConformalCalibration cal;
  cal.alpha = alpha;
  cal.n_cal = scores.size();
  // The 1e-9 slack keeps ceil() from overshooting on products such as 10 * 0.9.
  const double target = (static_cast<double>(cal.n_cal) + 1.0) * (1.0 - alpha);
  cal.rank = static_cast<std::size_t>(std::ceil(target - 1e-9));
  if (cal.rank > cal.n_cal) {
    cal.qhat = 1.0;
    cal.clamped = true;
    log_warning("conformal rank " + std::to_string(cal.rank) + " exceeds n_cal = " +
                std::to_string(cal.n_cal) + "; qhat clamped to 1");
    return cal;
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(cal.rank - 1),
                   sorted.end());
  cal.qhat = sorted[cal.rank - 1];
  return cal;
}

PredictionSet prediction_set(std::span<const double> p, const ConformalCalibration& cal) {
  PredictionSet set;
  double mass = 0.0;
  for (std::size_t idx : descending_order(p)) {
    if (!set.members.empty() && mass >= cal.qhat) break;
    set.members.push_back(static_cast<int>(idx));
    mass += p[idx];
  }
  std::sort(set.members.begin(), set.members.end());
  return set;
}

PredictionSet randomized_prediction_set(std::span<const double> p, const ConformalCalibration& cal,
                                        double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("APS randomization draw must lie in [0,1]");
  PredictionSet set;
  double before = 0.0;
  for (std::size_t idx : descending_order(p)) {
    if (!set.members.empty() && before + u * p[idx] > cal.qhat) break;
    set.members.push_back(static_cast<int>(idx));
    before += p[idx];
  }
  std::sort(set.members.begin(), set.members.end());
  return set;
}

std::vector<double> aps_scores(const ProbabilityMatrix& p, std::span<const int> labels,
                               bool randomized, std::uint64_t seed) {
  if (labels.size() != p.samples()) throw ValidationError("APS scores: label count mismatch");
  Rng rng(seed);
  std::vector<double> s(p.samples());
  for (std::size_t n = 0; n < p.samples(); ++n) {
    const double u = randomized ? rng.uniform() : 1.0;
    s[n] = aps_score(p.row(n), labels[n], randomized, u);
  }
  return s;
}

std::vector<PredictionSet> prediction_sets(const ProbabilityMatrix& p,
                                           const ConformalCalibration& cal, std::uint64_t seed) {
  std::vector<PredictionSet> sets(p.samples());
  std::vector<double> u;
  if (cal.randomized) {
    Rng rng(seed);
    u.resize(p.samples());
    for (double& v : u) v = rng.uniform();
  }
  const auto rows = static_cast<std::int64_t>(p.samples());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < rows; ++n) {
    sets[n] = cal.randomized ? randomized_prediction_set(p.row(n), cal, u[n])
                             : prediction_set(p.row(n), cal);
  }
  return sets;
}

CoverageReport coverage_report(std::span<const PredictionSet> sets, std::span<const int> labels,
                               std::size_t num_classes) {
  if (sets.size() != labels.size()) throw ValidationError("coverage: set/label count mismatch");
  if (sets.empty()) throw ValidationError("coverage: no samples");
  CoverageReport r;
  r.size_histogram.assign(num_classes + 1, 0);
  std::size_t covered = 0;
  std::size_t total_size = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].size() > num_classes) throw ValidationError("prediction set larger than K");
    if (sets[i].contains(labels[i])) ++covered;
    total_size += sets[i].size();
    ++r.size_histogram[sets[i].size()];
  }
  r.coverage = static_cast<double>(covered) / static_cast<double>(sets.size());
  r.mean_size = static_cast<double>(total_size) / static_cast<double>(sets.size());
  return r;
}

}  // namespace uqxai
