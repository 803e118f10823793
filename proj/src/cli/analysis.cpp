#include <cmath>
#include <sstream>

#include "commands.hpp"
#include "uqxai/metrics.hpp"

namespace uqxai::cli {

namespace {

std::vector<bool> correctness(const ProbabilityMatrix& p, const LabelVector& y) {
  const auto pred = predictions(p);
  std::vector<bool> ok(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) ok[i] = pred[i] == y[i];
  return ok;
}

}  // namespace

bool all_labeled(const LoadedPredictions& in, const std::vector<std::size_t>& rows) {
  for (std::size_t r : rows) {
    if (in.manifest().rows[r].label < 0) return false;
  }
  return true;
}

ConformalStep run_conformal_step(const LoadedPredictions& in, double alpha, bool randomized,
                                 std::uint64_t seed, const std::vector<std::size_t>& eval_rows,
                                 const ProbabilityMatrix& p_eval) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  ConformalStep step;
  std::vector<std::string> ids;
  if (in.split() && !in.split()->conformal.empty()) {
    ids = in.split()->conformal;
    step.calibration_source = "conformal";
  } else if (in.split() && !in.split()->calibration.empty()) {
    ids = in.split()->calibration;
    step.calibration_source = "calibration";
  } else {
    throw ValidationError("conformal calibration needs --split with calibration or conformal ids");
  }
  const auto eval_ids = in.ids(eval_rows);
  require_disjoint(ids, eval_ids, "conformal calibration", "evaluation");
  const auto cal_rows = in.rows_for(ids);
  const ProbabilityMatrix p_cal = in.probabilities(cal_rows, true);
  const LabelVector y_cal = in.labels(cal_rows);
  const auto scores = aps_scores(p_cal, y_cal.values(), randomized, seed);
  step.cal = conformal_quantile(scores, alpha);
  step.cal.randomized = randomized;
  step.sets = prediction_sets(p_eval, step.cal, seed ^ 0x9e3779b97f4a7c15ULL);
  if (all_labeled(in, eval_rows)) {
    const LabelVector y = in.labels(eval_rows);
    step.coverage = coverage_report(step.sets, y.values(), in.classes());
  }
  return step;
}

nlohmann::json conformal_to_json(const ConformalStep& c, std::size_t num_classes) {
  nlohmann::json j;
  j["method"] = "aps";
  j["alpha"] = c.cal.alpha;
  j["target_coverage"] = 1.0 - c.cal.alpha;
  j["qhat"] = c.cal.qhat;
  j["n_cal"] = c.cal.n_cal;
  j["rank"] = c.cal.rank;
  j["clamped"] = c.cal.clamped;
  j["randomized"] = c.cal.randomized;
  j["calibration_source"] = c.calibration_source;
  j["num_classes"] = num_classes;
  if (c.coverage) {
    j["empirical_coverage"] = c.coverage->coverage;
    j["mean_set_size"] = c.coverage->mean_size;
    j["set_size_histogram"] = c.coverage->size_histogram;
  } else {
    double total = 0.0;
    for (const auto& s : c.sets) total += static_cast<double>(s.size());
    j["empirical_coverage"] = nullptr;
    j["mean_set_size"] = c.sets.empty() ? 0.0 : total / static_cast<double>(c.sets.size());
    std::vector<std::size_t> hist(num_classes + 1, 0);
    for (const auto& s : c.sets) ++hist[s.size()];
    j["set_size_histogram"] = hist;
  }
  return j;
}

SelectiveStep run_selective_step(const LoadedPredictions& in, const std::string& source,
                                 double target_risk, std::optional<double> threshold,
                                 const std::vector<std::size_t>& eval_rows,
                                 const ProbabilityMatrix& p_eval) {
  if (!(target_risk >= 0.0 && target_risk <= 1.0)) {
    throw ValidationError("target risk must lie in [0, 1]");
  }
  SelectiveStep step;
  step.eval_confidence = confidence_from_source(source, in, eval_rows, p_eval);
  const bool eval_labeled = all_labeled(in, eval_rows);
  if (eval_labeled) {
    step.eval_curve = risk_coverage_curve(step.eval_confidence, correctness(p_eval, in.labels(eval_rows)));
  }

  if (threshold) {
    step.user_threshold = true;
    step.fit_on = "user";
    step.policy.threshold = *threshold;
    step.policy.target_risk = target_risk;
    step.policy.abstain_all = false;
  } else {
    std::vector<std::size_t> fit_rows;
    if (in.split() && !in.split()->calibration.empty()) {
      fit_rows = in.rows_for(in.split()->calibration);
      step.fit_on = "calibration";
    } else if (eval_labeled) {
      fit_rows = eval_rows;
      step.fit_on = "evaluation";
    } else {
      throw ValidationError("fitting a selective threshold needs labeled samples");
    }
    const ProbabilityMatrix p_fit = in.probabilities(fit_rows, true);
    const auto conf = confidence_from_source(source, in, fit_rows, p_fit);
    const auto curve = risk_coverage_curve(conf, correctness(p_fit, in.labels(fit_rows)));
    step.policy = threshold_for_target_risk(curve, target_risk);
  }

  step.decisions.reserve(eval_rows.size());
  for (double c : step.eval_confidence) step.decisions.push_back(selective_decide(c, step.policy));
  return step;
}

nlohmann::json selective_to_json(const SelectiveStep& s, const std::string& source) {
  nlohmann::json j;
  j["confidence_source"] = source;
  j["target_risk"] = s.policy.target_risk;
  j["threshold_fit_on"] = s.fit_on;
  j["threshold"] = std::isfinite(s.policy.threshold) ? nlohmann::json(s.policy.threshold)
                                                     : nlohmann::json(nullptr);
  j["abstain_all"] = s.policy.abstain_all;
  if (!s.user_threshold) {
    j["fit"] = {{"achieved_risk", s.policy.achieved_risk},
                {"coverage", s.policy.coverage},
                {"abstention_rate", s.policy.abstention_rate}};
  } else {
    j["fit"] = nullptr;
  }

  std::size_t accepted = 0;
  for (const auto& d : s.decisions) accepted += d.decision == Decision::kAccept;
  const double n = static_cast<double>(s.decisions.size());
  nlohmann::json ev;
  ev["n"] = s.decisions.size();
  ev["accepted"] = accepted;
  ev["coverage"] = n > 0 ? static_cast<double>(accepted) / n : 0.0;
  ev["abstention_rate"] = n > 0 ? 1.0 - static_cast<double>(accepted) / n : 1.0;
  if (!s.eval_curve.points.empty()) {
    ev["aurc"] = s.eval_curve.aurc;
    ev["risk_at_full_coverage"] = s.eval_curve.points.back().risk;
    // Risk among accepted samples: the accepted set is a prefix of the curve.
    ev["risk_among_accepted"] =
        accepted > 0 ? nlohmann::json(s.eval_curve.points[accepted - 1].risk) : nlohmann::json(nullptr);
  } else {
    ev["aurc"] = nullptr;
    ev["risk_at_full_coverage"] = nullptr;
    ev["risk_among_accepted"] = nullptr;
  }
  j["evaluation"] = ev;
  return j;
}

std::string risk_coverage_csv(const RiskCoverageCurve& c) {
  std::ostringstream os;
  os << "k,coverage,risk,threshold,clean_cut\n";
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto& p = c.points[i];
    os << (i + 1) << "," << format_double(p.coverage) << "," << format_double(p.risk) << ","
       << format_double(p.threshold) << "," << (c.cut_is_clean[i] ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string decisions_csv(const LoadedPredictions& in, const std::vector<std::size_t>& rows,
                          const ProbabilityMatrix& p, const SelectiveStep& s,
                          const std::vector<PredictionSet>* sets, std::size_t large_set_size) {
  std::ostringstream os;
  os << "sample_id,label,predicted,confidence,set_size,set_members,decision,reason,large_set\n";
  const auto pred = predictions(p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = in.manifest().rows[rows[i]];
    os << r.sample_id << ",";
    if (r.label >= 0) os << r.label;
    os << "," << pred[i] << "," << format_double(s.eval_confidence[i]) << ",";
    if (sets) {
      const auto& set = (*sets)[i];
      os << set.size() << ",";
      for (std::size_t m = 0; m < set.members.size(); ++m) os << (m ? ";" : "") << set.members[m];
    } else {
      os << ",";
    }
    os << "," << to_string(s.decisions[i].decision) << "," << to_string(s.decisions[i].reason) << ",";
    if (sets) os << (((*sets)[i].size() >= large_set_size) ? 1 : 0);
    os << "\n";
  }
  return os.str();
}

}  // namespace uqxai::cli
