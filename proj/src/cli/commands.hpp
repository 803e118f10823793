#pragma once

// Internal to the CLI: option structs, shared input loading, and one
// add_/run_ pair per subcommand.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uqxai/conformal.hpp"
#include "uqxai/core.hpp"
#include "uqxai/io.hpp"
#include "uqxai/report.hpp"
#include "uqxai/npy.hpp"
#include "uqxai/selective.hpp"

namespace uqxai::cli {

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

void add_common_options(CLI::App* sub, CommonOptions& c, bool seed_required);

/// Applies keys from the --config JSON to options not given on the command
/// line. Keys are option long names with '-' or '_'.
void apply_config(CLI::App* sub, const std::string& config_path);

/// Throws ValidationError when a stochastic command runs without --seed.
std::uint64_t require_seed(const CommonOptions& c, const std::string& command);

struct PredictionOptions {
  std::string logits;
  std::string probs;
  std::string passes;
  std::string passes_kind = "logits";
  std::string evidence;
  std::string manifest;
  std::string split;
  std::string calibration;
};

void add_prediction_options(CLI::App* sub, PredictionOptions& o, bool allow_calibration = true);

struct CalibrationArtifact {
  double temperature = 1.0;
  std::vector<std::string> calibration_ids;
};

/// Predictions aligned to manifest rows, with optional temperature.
class LoadedPredictions {
 public:
  static LoadedPredictions load(const PredictionOptions& o, Provenance& prov);

  const Manifest& manifest() const { return manifest_; }
  const std::optional<Split>& split() const { return split_; }
  const std::optional<CalibrationArtifact>& calibration() const { return calibration_; }
  std::size_t classes() const { return k_; }
  const std::string& kind() const { return kind_; }
  bool has_passes() const { return passes_.has_value(); }
  bool has_evidence() const { return evidence_.has_value(); }

  /// Manifest row indices for the given ids.
  std::vector<std::size_t> rows_for(const std::vector<std::string>& ids) const;
  std::vector<std::size_t> all_rows() const;
  /// Evaluation rows: the split's evaluation list, or every row. Enforces
  /// disjointness from the calibration artifact's ids.
  std::vector<std::size_t> evaluation_rows() const;

  /// Probabilities for `rows`; temperature applied when `calibrated` and an
  /// artifact is loaded.
  ProbabilityMatrix probabilities(const std::vector<std::size_t>& rows, bool calibrated) const;
  /// Temperature-scaled pass stack for `rows` (requires passes).
  PassStack pass_stack(const std::vector<std::size_t>& rows, bool calibrated) const;
  /// Evidential uncertainty mass u = K / S for `rows` (requires evidence).
  std::vector<double> evidential_mass(const std::vector<std::size_t>& rows) const;
  LabelVector labels(const std::vector<std::size_t>& rows) const;
  std::vector<std::string> ids(const std::vector<std::size_t>& rows) const;
  std::vector<std::string> group_values(const std::vector<std::size_t>& rows,
                                        const std::string& key) const;

  double temperature() const { return calibration_ ? calibration_->temperature : 1.0; }

 private:
  Manifest manifest_;
  std::optional<Split> split_;
  std::optional<CalibrationArtifact> calibration_;
  std::size_t k_ = 0;
  std::size_t n_ = 0;
  std::string kind_;
  std::optional<Matrix> logits_;
  std::optional<Matrix> probs_;
  std::optional<PassStack> passes_;
  std::optional<Matrix> evidence_;
};

/// Per-sample confidence from the named source.
std::vector<double> confidence_from_source(const std::string& source, const LoadedPredictions& in,
                                           const std::vector<std::size_t>& rows,
                                           const ProbabilityMatrix& p);

nlohmann::json bins_to_json(const ReliabilityBins& b);

void ensure_out_dir(const std::string& out);

// Shared analysis steps -------------------------------------------------------

bool all_labeled(const LoadedPredictions& in, const std::vector<std::size_t>& rows);

struct ConformalStep {
  ConformalCalibration cal;
  std::string calibration_source;  // "conformal" or "calibration" split list
  std::vector<PredictionSet> sets;
  std::optional<CoverageReport> coverage;
};

/// Fits qhat on the split's conformal ids (or calibration ids) and builds sets
/// for `eval_rows` from `p_eval`.
ConformalStep run_conformal_step(const LoadedPredictions& in, double alpha, bool randomized,
                                 std::uint64_t seed, const std::vector<std::size_t>& eval_rows,
                                 const ProbabilityMatrix& p_eval);
nlohmann::json conformal_to_json(const ConformalStep& c, std::size_t num_classes);

struct SelectiveStep {
  SelectivePolicy policy;
  std::string fit_on;  // "calibration" or "evaluation"
  RiskCoverageCurve eval_curve;
  std::vector<double> eval_confidence;
  std::vector<DecisionRecord> decisions;
  bool user_threshold = false;
};

SelectiveStep run_selective_step(const LoadedPredictions& in, const std::string& source,
                                 double target_risk, std::optional<double> threshold,
                                 const std::vector<std::size_t>& eval_rows,
                                 const ProbabilityMatrix& p_eval);
nlohmann::json selective_to_json(const SelectiveStep& s, const std::string& source);
std::string risk_coverage_csv(const RiskCoverageCurve& c);

/// One row per evaluated sample. `sets` may be empty (no conformal columns).
std::string decisions_csv(const LoadedPredictions& in, const std::vector<std::size_t>& rows,
                          const ProbabilityMatrix& p, const SelectiveStep& s,
                          const std::vector<PredictionSet>* sets, std::size_t large_set_size);

// Subcommands ---------------------------------------------------------------

struct SynthOptions {
  CommonOptions common;
  std::size_t n_cal = 500;
  std::size_t n_test = 5000;
  std::size_t num_classes = 6;
  std::size_t passes = 10;
  double miscalibration = 1.0;
  double logit_scale = 2.0;
  double pass_noise = 0.5;
  std::size_t image_size = 32;
  std::size_t cell = 8;
};
CLI::App* add_synth(CLI::App& app, SynthOptions& o);
void run_synth(const SynthOptions& o);

struct CalibrateOptions {
  CommonOptions common;
  PredictionOptions in;
  std::size_t bins = 15;
};
CLI::App* add_calibrate(CLI::App& app, CalibrateOptions& o);
void run_calibrate(const CalibrateOptions& o);

struct ReportOptions {
  CommonOptions common;
  PredictionOptions in;
  double alpha = 0.1;
  bool randomized = false;
  double target_risk = 0.05;
  std::string group_by;
  std::string confidence_source = "max_probability";
  std::size_t bins = 15;
};
CLI::App* add_report(CLI::App& app, ReportOptions& o);
void run_report(const ReportOptions& o);

struct ConformalOptions {
  CommonOptions common;
  PredictionOptions in;
  double alpha = 0.1;
  bool randomized = false;
};
CLI::App* add_conformal(CLI::App& app, ConformalOptions& o);
void run_conformal(const ConformalOptions& o);

struct SelectOptions {
  CommonOptions common;
  PredictionOptions in;
  double target_risk = 0.05;
  std::optional<double> threshold;
  std::string confidence_source = "max_probability";
};
CLI::App* add_select(CLI::App& app, SelectOptions& o);
void run_select(const SelectOptions& o);

struct ExplainOptions {
  CommonOptions common;
  std::string image;
  std::size_t image_index = 0;
  std::string oracle;
  std::string segmentation;
  std::size_t cell = 8;
  int class_index = -1;
  std::size_t n_samples = 1000;
  double kernel_width = 0.25;
  double ridge_lambda = 1.0;
  std::string fill = "mean";
  std::size_t repeats = 10;
  std::size_t top_k = 0;
  std::string saliency;
  std::optional<double> u_tilde;
  std::string passes;
  std::string passes_kind = "logits";
  std::string evidence;
  std::size_t sample_index = 0;
};
CLI::App* add_explain(CLI::App& app, ExplainOptions& o);
void run_explain(const ExplainOptions& o);

/// Full CLI entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace uqxai::cli
