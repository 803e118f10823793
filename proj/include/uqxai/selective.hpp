#pragma once

#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace uqxai {

struct RiskCoveragePoint {
  double coverage = 0.0;  // k / N
  double risk = 0.0;      // errors among the k most confident / k
  double threshold = 0.0; // confidence of the k-th most confident sample
};

struct RiskCoverageCurve {
  std::vector<RiskCoveragePoint> points;  // k = 1..N
  double aurc = 0.0;                      // mean of prefix risks
  /// points[k-1] is a valid cut: the k-th confidence is strictly greater than
  /// the (k+1)-th, so a ">= threshold" rule accepts exactly k samples.
  std::vector<bool> cut_is_clean;
};

struct SelectivePolicy {
  double threshold = std::numeric_limits<double>::infinity();
  double target_risk = 0.0;
  double achieved_risk = 0.0;
  double coverage = 0.0;
  double abstention_rate = 1.0;
  bool abstain_all = true;  // no feasible point: every sample is escalated
};

enum class Decision { kAccept, kEscalate };

enum class ReasonCode { kConfident, kLowConfidence, kAbstainAllPolicy };

struct DecisionRecord {
  Decision decision = Decision::kEscalate;
  ReasonCode reason = ReasonCode::kAbstainAllPolicy;
};

/// Sorts by confidence descending (index ascending on ties) and emits one
/// point per prefix.
RiskCoverageCurve risk_coverage_curve(std::span<const double> confidence,
                                      const std::vector<bool>& correct);

/// Largest-coverage clean cut with risk <= target; abstain-all when none exists.
SelectivePolicy threshold_for_target_risk(const RiskCoverageCurve& curve, double target);

/// Accept iff confidence >= threshold.
DecisionRecord selective_decide(double confidence, const SelectivePolicy& policy);

std::string_view to_string(Decision d);
std::string_view to_string(ReasonCode r);

}  // namespace uqxai
