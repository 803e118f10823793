#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "uqxai/log.hpp"
#include "uqxai/metrics.hpp"
#include "uqxai/uncertainty.hpp"

namespace uqxai::cli {

namespace {

constexpr std::size_t kLargeSetSize = 2;

nlohmann::json optional_list(const std::vector<std::optional<double>>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& x : v) arr.push_back(x ? nlohmann::json(*x) : nlohmann::json(nullptr));
  return arr;
}

nlohmann::json classification_to_json(const ClassificationReport& r) {
  return {{"top1_accuracy", r.top1_accuracy},
          {"macro_f1", r.macro_f1},
          {"per_class_f1", r.per_class_f1},
          {"per_class_sensitivity", optional_list(r.per_class_sensitivity)},
          {"per_class_specificity", optional_list(r.per_class_specificity)},
          {"support", r.support},
          {"confusion_matrix", r.confusion},
          {"warnings", r.warnings}};
}

nlohmann::json summary(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  double sum = 0.0, lo = v.front(), hi = v.front();
  for (double x : v) {
    sum += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return {{"mean", sum / static_cast<double>(v.size())}, {"min", lo}, {"max", hi}};
}

nlohmann::json out_of_scope(const std::string& note) {
  return {{"status", "out_of_scope"}, {"note", note}};
}

}  // namespace

CLI::App* add_report(CLI::App& app, ReportOptions& o) {
  auto* sub = app.add_subcommand("report", "Metrics, conformal sets, selective decisions and plots");
  add_common_options(sub, o.common, false);
  add_prediction_options(sub, o.in, true);
  sub->add_option("--alpha", o.alpha, "Conformal miscoverage level")->capture_default_str();
  sub->add_flag("--randomized", o.randomized, "Randomized APS scores and sets (needs --seed)");
  sub->add_option("--target-risk", o.target_risk, "Selective target risk")->capture_default_str();
  sub->add_option("--group-by", o.group_by, "Manifest column for stratified sections");
  sub->add_option("--confidence-source", o.confidence_source,
                  "max_probability | one_minus_u_tilde | one_minus_u_mass")
      ->check(CLI::IsMember({"max_probability", "one_minus_u_tilde", "one_minus_u_mass"}))
      ->capture_default_str();
  sub->add_option("--bins", o.bins, "ECE bins")->capture_default_str();
  return sub;
}

void run_report(const ReportOptions& o) {
  if (o.common.out.empty()) throw ValidationError("--out is mandatory");
  if (o.bins < 1) throw ValidationError("--bins must be >= 1");
  nlohmann::json config{{"alpha", o.alpha},
                        {"randomized", o.randomized},
                        {"target_risk", o.target_risk},
                        {"group_by", o.group_by},
                        {"confidence_source", o.confidence_source},
                        {"bins", o.bins}};
  Provenance prov("report", config);
  std::uint64_t seed = 0;
  if (o.randomized) seed = require_seed(o.common, "report --randomized");
  if (o.common.seed) {
    seed = *o.common.seed;
    prov.set_seed(seed);
  }

  const LoadedPredictions in = LoadedPredictions::load(o.in, prov);
  const auto rows = in.evaluation_rows();
  const ProbabilityMatrix p = in.probabilities(rows, true);
  const ProbabilityMatrix p_raw = in.probabilities(rows, false);
  const LabelVector y = in.labels(rows);
  const std::size_t k = in.classes();

  const ClassificationReport cls = classification_report(p, y);
  for (const auto& w : cls.warnings) log_warning(w);
  const EceResult e = ece(p, y, o.bins);
  const EceResult e_raw = ece(p_raw, y, o.bins);
  const double b = brier(p, y);

  nlohmann::json rep;
  rep["schema_version"] = kReportSchemaVersion;
  rep["brier_convention"] = kBrierConvention;
  rep["n_samples"] = rows.size();
  rep["num_classes"] = k;
  rep["inputs"] = {{"kind", in.kind()},
                   {"temperature", in.temperature()},
                   {"calibrated", in.calibration().has_value()},
                   {"evaluation_source", in.split() && !in.split()->evaluation.empty()
                                             ? "split.evaluation"
                                             : "manifest"}};

  rep["accuracy"] = classification_to_json(cls);
  rep["calibration"] = {{"ece", e.ece},
                        {"bins", o.bins},
                        {"reliability", bins_to_json(e.bins)},
                        {"brier", b},
                        {"temperature", in.temperature()},
                        {"before_calibration",
                         {{"ece", e_raw.ece}, {"brier", brier(p_raw, y)},
                          {"reliability", bins_to_json(e_raw.bins)}}}};

  std::vector<double> entropy(p.samples());
  for (std::size_t n = 0; n < p.samples(); ++n) entropy[n] = predictive_entropy(p.row(n));
  nlohmann::json unc{{"source", in.has_passes() ? "pass_stack" : "single_prediction"},
                     {"predictive_entropy", summary(entropy)},
                     {"u_tilde", summary(normalize_uncertainty(entropy, k))}};
  if (in.has_passes()) {
    const PassStack stack = in.pass_stack(rows, true);
    unc["passes"] = stack.passes();
    unc["mutual_information"] = summary(mutual_information(stack));
    unc["disagreement"] = summary(disagreement(stack));
  } else {
    unc["passes"] = nullptr;
    unc["mutual_information"] = nullptr;
    unc["disagreement"] = nullptr;
  }
  unc["evidential_u_mass"] = in.has_evidence() ? summary(in.evidential_mass(rows)) : nullptr;
  rep["uncertainty"] = unc;

  const ConformalStep conf = run_conformal_step(in, o.alpha, o.randomized, seed, rows, p);
  rep["conformal"] = conformal_to_json(conf, k);

  const SelectiveStep sel =
      run_selective_step(in, o.confidence_source, o.target_risk, std::nullopt, rows, p);
  rep["selective_prediction"] = selective_to_json(sel, o.confidence_source);

  if (!o.group_by.empty()) {
    const StratifiedReport strat = stratified_report(p, y, in.group_values(rows, o.group_by), o.bins);
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [key, g] : strat.groups) {
      groups[key] = {{"n", g.n},
                     {"low_support", g.low_support},
                     {"accuracy", classification_to_json(g.classification)},
                     {"ece", g.ece.ece},
                     {"brier", g.brier}};
    }
    rep["stratified"] = {{"group_by", o.group_by}, {"groups", groups}};
  } else {
    rep["stratified"] = {{"group_by", nullptr}, {"groups", nlohmann::json::object()}};
  }

  rep["explainability"] = out_of_scope("produced by the explain command, not by report");

  std::size_t accepted = 0, large = 0;
  nlohmann::json reasons = nlohmann::json::object();
  for (std::size_t i = 0; i < sel.decisions.size(); ++i) {
    const auto& d = sel.decisions[i];
    accepted += d.decision == Decision::kAccept;
    large += conf.sets[i].size() >= kLargeSetSize;
    const std::string r(to_string(d.reason));
    reasons[r] = reasons.value(r, 0) + 1;
  }
  rep["workflow"] = {{"accepted", accepted},
                     {"escalated", sel.decisions.size() - accepted},
                     {"reasons", reasons},
                     {"large_set_size", kLargeSetSize},
                     {"large_set_count", large},
                     {"logging_mlops", out_of_scope("audit trail and drift monitoring are integration points")}};
  rep["quality_control"] = {{"status", "reserved"}, {"score", nullptr}};
  rep["provenance"] = prov.to_json();

  ensure_out_dir(o.common.out);
  const std::filesystem::path out(o.common.out);
  write_file_atomic(out / "reliability.svg", reliability_svg(e.bins, "Reliability (calibrated)"));
  write_file_atomic(out / "reliability_uncalibrated.svg",
                    reliability_svg(e_raw.bins, "Reliability (uncalibrated)"));
  write_file_atomic(out / "risk_coverage.svg",
                    risk_coverage_svg(sel.eval_curve, "Risk-coverage", &sel.policy));
  write_file_atomic(out / "risk_coverage.csv", risk_coverage_csv(sel.eval_curve));
  write_file_atomic(out / "decisions.csv", decisions_csv(in, rows, p, sel, &conf.sets, kLargeSetSize));
  write_file_atomic(out / "report.json", dump_json(rep));

  std::cout << "report: n = " << rows.size() << "  acc = " << cls.top1_accuracy
            << "  macro F1 = " << cls.macro_f1 << "  ECE = " << e.ece << "  Brier = " << b
            << "  coverage = " << rep["conformal"]["empirical_coverage"].get<double>()
            << "  escalated = " << (sel.decisions.size() - accepted) << "\n";
}

}  // namespace uqxai::cli
