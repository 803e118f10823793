#include <filesystem>
#include <iostream>

#include "commands.hpp"

namespace uqxai::cli {

CLI::App* add_select(CLI::App& app, SelectOptions& o) {
  auto* sub = app.add_subcommand("select", "Risk-coverage analysis and accept/escalate decisions");
  add_common_options(sub, o.common, false);
  add_prediction_options(sub, o.in, true);
  sub->add_option("--target-risk", o.target_risk, "Target risk among accepted samples")
      ->capture_default_str();
  sub->add_option("--threshold", o.threshold, "Fixed confidence threshold (skips fitting)");
  sub->add_option("--confidence-source", o.confidence_source,
                  "max_probability | one_minus_u_tilde | one_minus_u_mass")
      ->check(CLI::IsMember({"max_probability", "one_minus_u_tilde", "one_minus_u_mass"}))
      ->capture_default_str();
  return sub;
}

void run_select(const SelectOptions& o) {
  if (o.common.out.empty()) throw ValidationError("--out is mandatory");
  nlohmann::json config{{"target_risk", o.target_risk},
                        {"threshold", o.threshold ? nlohmann::json(*o.threshold) : nlohmann::json(nullptr)},
                        {"confidence_source", o.confidence_source}};
  Provenance prov("select", config);
  if (o.common.seed) prov.set_seed(*o.common.seed);
  const LoadedPredictions in = LoadedPredictions::load(o.in, prov);
  const auto rows = in.evaluation_rows();
  const ProbabilityMatrix p = in.probabilities(rows, true);
  const SelectiveStep step =
      run_selective_step(in, o.confidence_source, o.target_risk, o.threshold, rows, p);

  nlohmann::json j = selective_to_json(step, o.confidence_source);
  j["temperature"] = in.temperature();
  j["provenance"] = prov.to_json();

  ensure_out_dir(o.common.out);
  const std::filesystem::path out(o.common.out);
  write_file_atomic(out / "decisions.csv", decisions_csv(in, rows, p, step, nullptr, 0));
  write_file_atomic(out / "risk_coverage.csv", risk_coverage_csv(step.eval_curve));
  write_file_atomic(out / "risk_coverage.svg",
                    risk_coverage_svg(step.eval_curve, "Risk-coverage", &step.policy));
  write_file_atomic(out / "selective.json", dump_json(j));

  const auto& ev = j["evaluation"];
  std::cout << "select: threshold = " << j["threshold"].dump() << "  coverage = "
            << ev["coverage"].get<double>() << "  abstention = " << ev["abstention_rate"].get<double>()
            << "\n";
}

}  // namespace uqxai::cli
