#include "uqxai/selective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "uqxai/core.hpp"

namespace uqxai {

RiskCoverageCurve risk_coverage_curve(std::span<const double> confidence,
                                      const std::vector<bool>& correct) {
  if (confidence.empty()) throw ValidationError("risk-coverage curve needs at least one sample");
  if (confidence.size() != correct.size()) {
    throw ValidationError("risk-coverage: confidence/correctness length mismatch");
  }
  for (double c : confidence) {
    if (!std::isfinite(c)) throw ValidationError("risk-coverage: non-finite confidence");
  }
  const std::size_t n = confidence.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return confidence[a] > confidence[b];
  });

  RiskCoverageCurve curve;
  curve.points.resize(n);
  curve.cut_is_clean.resize(n);
  std::size_t errors = 0;
  double risk_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t idx = order[k - 1];
    if (!correct[idx]) ++errors;
    auto& pt = curve.points[k - 1];
    pt.coverage = static_cast<double>(k) / static_cast<double>(n);
    pt.risk = static_cast<double>(errors) / static_cast<double>(k);
    pt.threshold = confidence[idx];
    curve.cut_is_clean[k - 1] = k == n || confidence[order[k]] < confidence[idx];
    risk_sum += pt.risk;
  }
  curve.aurc = risk_sum / static_cast<double>(n);
  return curve;
}

SelectivePolicy threshold_for_target_risk(const RiskCoverageCurve& curve, double target) {
  if (curve.points.empty()) throw ValidationError("threshold search on an empty curve");
  SelectivePolicy policy;
  policy.target_risk = target;
  for (std::size_t i = curve.points.size(); i-- > 0;) {
    if (!curve.cut_is_clean[i]) continue;
    const auto& pt = curve.points[i];
    if (pt.risk <= target) {
      policy.threshold = pt.threshold;
      policy.achieved_risk = pt.risk;
      policy.coverage = pt.coverage;
      policy.abstention_rate = 1.0 - pt.coverage;
      policy.abstain_all = false;
      return policy;
    }
  }
  policy.threshold = std::numeric_limits<double>::infinity();
  policy.achieved_risk = 0.0;
  policy.coverage = 0.0;
  policy.abstention_rate = 1.0;
  policy.abstain_all = true;
  return policy;
}

DecisionRecord selective_decide(double confidence, const SelectivePolicy& policy) {
  if (policy.abstain_all) return {Decision::kEscalate, ReasonCode::kAbstainAllPolicy};
  if (confidence >= policy.threshold) return {Decision::kAccept, ReasonCode::kConfident};
  return {Decision::kEscalate, ReasonCode::kLowConfidence};
}

std::string_view to_string(Decision d) {
  return d == Decision::kAccept ? "accept" : "escalate";
}

std::string_view to_string(ReasonCode r) {
  switch (r) {
    case ReasonCode::kConfident:
      return "confident";
    case ReasonCode::kLowConfidence:
      return "low_confidence";
    case ReasonCode::kAbstainAllPolicy:
      return "abstain_all_policy";
  }
  return "unknown";
}

}  // namespace uqxai
