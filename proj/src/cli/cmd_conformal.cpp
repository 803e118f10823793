#include <filesystem>
#include <iostream>
#include <sstream>

#include "commands.hpp"

namespace uqxai::cli {

CLI::App* add_conformal(CLI::App& app, ConformalOptions& o) {
  auto* sub = app.add_subcommand("conformal", "Split-conformal APS prediction sets");
  add_common_options(sub, o.common, false);
  add_prediction_options(sub, o.in, true);
  sub->add_option("--alpha", o.alpha, "Miscoverage level")->capture_default_str();
  sub->add_flag("--randomized", o.randomized, "Randomized APS scores and sets (needs --seed)");
  return sub;
}

void run_conformal(const ConformalOptions& o) {
  if (o.common.out.empty()) throw ValidationError("--out is mandatory");
  Provenance prov("conformal", {{"alpha", o.alpha}, {"randomized", o.randomized}});
  std::uint64_t seed = 0;
  if (o.randomized) seed = require_seed(o.common, "conformal --randomized");
  if (o.common.seed) {
    seed = *o.common.seed;
    prov.set_seed(seed);
  }
  const LoadedPredictions in = LoadedPredictions::load(o.in, prov);
  const auto rows = in.evaluation_rows();
  const ProbabilityMatrix p = in.probabilities(rows, true);
  const ConformalStep step = run_conformal_step(in, o.alpha, o.randomized, seed, rows, p);

  nlohmann::json j = conformal_to_json(step, in.classes());
  j["temperature"] = in.temperature();
  j["n_evaluation"] = rows.size();
  j["provenance"] = prov.to_json();

  std::ostringstream csv;
  csv << "sample_id,label,set_size,set_members,covered\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = in.manifest().rows[rows[i]];
    const auto& s = step.sets[i];
    csv << r.sample_id << ",";
    if (r.label >= 0) csv << r.label;
    csv << "," << s.size() << ",";
    for (std::size_t m = 0; m < s.members.size(); ++m) csv << (m ? ";" : "") << s.members[m];
    csv << ",";
    if (r.label >= 0) csv << (s.contains(r.label) ? 1 : 0);
    csv << "\n";
  }

  ensure_out_dir(o.common.out);
  const std::filesystem::path out(o.common.out);
  write_file_atomic(out / "prediction_sets.csv", csv.str());
  write_file_atomic(out / "conformal.json", dump_json(j));

  std::cout << "conformal: qhat = " << step.cal.qhat << "  n_cal = " << step.cal.n_cal;
  if (step.coverage) {
    std::cout << "  coverage = " << step.coverage->coverage << "  mean size = " << step.coverage->mean_size;
  }
  std::cout << "\n";
}

}  // namespace uqxai::cli
