#include <filesystem>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "uqxai/calibration.hpp"
#include "uqxai/log.hpp"
#include "uqxai/metrics.hpp"
#include "uqxai/npy.hpp"

namespace uqxai::cli {

namespace {

nlohmann::json split_summary(const LogitsMatrix& z, const LabelVector& y, double t,
                             std::size_t bins) {
  const auto before = apply_temperature(z, 1.0);
  const auto after = apply_temperature(z, t);
  return {{"n", z.samples()},
          {"nll_before", nll(z, y, 1.0)},
          {"nll_after", nll(z, y, t)},
          {"ece_before", ece(before, y, bins).ece},
          {"ece_after", ece(after, y, bins).ece}};
}

LogitsMatrix logits_for(const LoadedPredictions& in, const std::vector<std::size_t>& rows,
                        const PredictionOptions& opt) {
  const Matrix all = npy::read_matrix(opt.logits);
  Matrix sub(rows.size(), all.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = all.row(in.manifest().rows[rows[i]].offset);
    std::copy(src.begin(), src.end(), sub.row(i).begin());
  }
  return LogitsMatrix(std::move(sub));
}

}  // namespace

CLI::App* add_calibrate(CLI::App& app, CalibrateOptions& o) {
  auto* sub = app.add_subcommand("calibrate", "Fit a temperature on the calibration split");
  add_common_options(sub, o.common, false);
  add_prediction_options(sub, o.in, false);
  sub->add_option("--bins", o.bins, "ECE bins")->capture_default_str();
  return sub;
}

void run_calibrate(const CalibrateOptions& o) {
  if (o.in.logits.empty()) throw ValidationError("calibrate needs --logits");
  if (o.in.split.empty()) throw ValidationError("calibrate needs --split");
  if (o.common.out.empty()) throw ValidationError("--out is mandatory");

  nlohmann::json config{{"bins", o.bins}};
  Provenance prov("calibrate", config);
  if (o.common.seed) prov.set_seed(*o.common.seed);
  // Split overlap is checked while loading, before any output exists.
  const LoadedPredictions in = LoadedPredictions::load(o.in, prov);
  const Split& split = *in.split();
  if (split.calibration.empty()) throw ValidationError("split has no calibration ids");

  const auto cal_rows = in.rows_for(split.calibration);
  const LogitsMatrix z_cal = logits_for(in, cal_rows, o.in);
  const LabelVector y_cal = in.labels(cal_rows);
  const TemperatureFit fit = fit_temperature(z_cal, y_cal);
  for (const auto& w : fit.warnings) log_warning(w);

  nlohmann::json art;
  art["schema_version"] = "uqxai.calibration/1";
  art["method"] = "temperature_scaling";
  art["temperature"] = fit.temperature;
  art["nll_before"] = fit.nll_before;
  art["nll_after"] = fit.nll_after;
  art["search"] = {{"range", {kMinTemperature, kMaxTemperature}},
                   {"grid_points", kTemperatureGridPoints},
                   {"refinement", "golden_section_log_t"},
                   {"log_tolerance", kLogTemperatureTolerance},
                   {"evaluations", fit.search_trace.size()}};
  art["ece_bins"] = o.bins;
  art["calibration_split"] = split_summary(z_cal, y_cal, fit.temperature, o.bins);
  if (!split.evaluation.empty()) {
    const auto eval_rows = in.rows_for(split.evaluation);
    art["evaluation_split"] =
        split_summary(logits_for(in, eval_rows, o.in), in.labels(eval_rows), fit.temperature, o.bins);
  } else {
    art["evaluation_split"] = nullptr;
  }
  art["warnings"] = fit.warnings;
  art["calibration_ids"] = split.calibration;
  art["provenance"] = prov.to_json();

  std::ostringstream trace;
  trace << "step,temperature,nll\n";
  for (std::size_t i = 0; i < fit.search_trace.size(); ++i) {
    trace << i << "," << format_double(fit.search_trace[i].first) << ","
          << format_double(fit.search_trace[i].second) << "\n";
  }

  ensure_out_dir(o.common.out);
  const std::filesystem::path out(o.common.out);
  write_file_atomic(out / "temperature_trace.csv", trace.str());
  write_file_atomic(out / "calibration.json", dump_json(art));

  const auto& cs = art["calibration_split"];
  std::cout << "calibrate: T* = " << fit.temperature << "  NLL " << fit.nll_before << " -> "
            << fit.nll_after << "  ECE(cal) " << cs["ece_before"].get<double>() << " -> "
            << cs["ece_after"].get<double>();
  if (!art["evaluation_split"].is_null()) {
    std::cout << "  ECE(eval) " << art["evaluation_split"]["ece_before"].get<double>() << " -> "
              << art["evaluation_split"]["ece_after"].get<double>();
  }
  std::cout << "\n";
}

}  // namespace uqxai::cli
