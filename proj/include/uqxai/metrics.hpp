#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uqxai/core.hpp"

namespace uqxai {

inline constexpr std::size_t kDefaultEceBins = 15;
inline constexpr std::size_t kLowSupportThreshold = 20;

/// Equal-width confidence bins. Empty bins carry no accuracy or confidence.
struct ReliabilityBins {
  std::vector<double> edges;  // B + 1 values, edges.front() == 0, edges.back() == 1
  std::vector<std::size_t> count;
  std::vector<std::optional<double>> mean_confidence;
  std::vector<std::optional<double>> accuracy;

  std::size_t size() const { return count.size(); }
};

struct EceResult {
  double ece = 0.0;
  ReliabilityBins bins;
};

struct ClassificationReport {
  std::vector<std::vector<std::size_t>> confusion;  // K x K, rows = truth, cols = predicted
  std::vector<std::size_t> support;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::optional<double>> per_class_sensitivity;  // absent when class absent from y
  std::vector<std::optional<double>> per_class_specificity;  // absent when no negatives
  double top1_accuracy = 0.0;
  std::vector<std::string> warnings;
};

struct GroupReport {
  std::size_t n = 0;
  bool low_support = false;
  ClassificationReport classification;
  EceResult ece;
  double brier = 0.0;
};

struct StratifiedReport {
  std::map<std::string, GroupReport> groups;  // ordered by key
};

/// Confidence is the maximum row probability. Bins are [edges[b], edges[b+1])
/// except the last, which is closed on the right.
EceResult ece(const ProbabilityMatrix& p, const LabelVector& y, std::size_t bins = kDefaultEceBins);

/// Multiclass Brier score, full-vector sum convention (range [0, 2]).
double brier(const ProbabilityMatrix& p, const LabelVector& y);

/// Predictions are row argmaxes (ties to the lowest index).
ClassificationReport classification_report(const ProbabilityMatrix& p, const LabelVector& y);

StratifiedReport stratified_report(const ProbabilityMatrix& p, const LabelVector& y,
                                   const std::vector<std::string>& groups,
                                   std::size_t bins = kDefaultEceBins);

/// Per-sample max probability.
std::vector<double> confidences(const ProbabilityMatrix& p);

/// Per-sample argmax prediction.
std::vector<int> predictions(const ProbabilityMatrix& p);

}  // namespace uqxai
