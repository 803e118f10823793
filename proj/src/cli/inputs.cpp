#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "commands.hpp"
#include "uqxai/calibration.hpp"
#include "uqxai/npy.hpp"
#include "uqxai/uncertainty.hpp"

namespace uqxai::cli {

namespace {

std::string json_scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ValidationError("config values must be strings, numbers, booleans or arrays of those");
}

Matrix log_probabilities(const Matrix& p) {
  Matrix out(p.rows, p.cols);
  for (std::size_t i = 0; i < p.data.size(); ++i) out.data[i] = std::log(std::max(p.data[i], 1e-300));
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& offsets) {
  Matrix out(offsets.size(), m.cols);
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    auto src = m.row(offsets[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

void add_common_options(CLI::App* sub, CommonOptions& c, bool seed_required) {
  sub->add_option("--seed", c.seed,
                  seed_required ? "RNG seed (mandatory)" : "RNG seed (recorded in provenance)");
  sub->add_option("--config", c.config, "JSON file whose keys supply option values");
  sub->add_option("--out", c.out, "Output directory (mandatory)");
}

void apply_config(CLI::App* sub, const std::string& config_path) {
  if (config_path.empty()) return;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(config_path + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError(config_path + ": config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + name);
    } catch (const CLI::OptionNotFound&) {
      throw ValidationError(config_path + ": unknown config key '" + key + "' for " +
                            sub->get_name());
    }
    if (opt->count() > 0 || name == "config") continue;
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(json_scalar_text(v));
    } else {
      opt->add_result(json_scalar_text(value));
    }
    opt->run_callback();
  }
}

std::uint64_t require_seed(const CommonOptions& c, const std::string& command) {
  if (!c.seed) throw ValidationError(command + " is stochastic: --seed is mandatory");
  return *c.seed;
}

void ensure_out_dir(const std::string& out) {
  if (out.empty()) throw ValidationError("--out is mandatory");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw ComputationError("cannot create output directory " + out + ": " + ec.message());
}

void add_prediction_options(CLI::App* sub, PredictionOptions& o, bool allow_calibration) {
  sub->add_option("--logits", o.logits, "N x K logits (.npy)");
  sub->add_option("--probs", o.probs, "N x K probabilities (.npy)");
  sub->add_option("--passes", o.passes, "T x N x K pass stack (.npy)");
  sub->add_option("--passes-kind", o.passes_kind, "logits | probabilities")
      ->check(CLI::IsMember({"logits", "probabilities"}));
  sub->add_option("--evidence", o.evidence, "N x K Dirichlet concentrations (.npy)");
  sub->add_option("--manifest", o.manifest, "Manifest / label CSV (mandatory)");
  sub->add_option("--split", o.split, "Split JSON with calibration/evaluation ids");
  if (allow_calibration) {
    sub->add_option("--calibration", o.calibration, "Calibration artifact from `calibrate`");
  }
}

LoadedPredictions LoadedPredictions::load(const PredictionOptions& o, Provenance& prov) {
  LoadedPredictions lp;
  if (o.manifest.empty()) throw ValidationError("--manifest is mandatory");
  const int sources = !o.logits.empty() + !o.probs.empty() + !o.passes.empty();
  if (sources != 1) {
    throw ValidationError("exactly one of --logits, --probs, --passes is required");
  }

  if (!o.logits.empty()) {
    lp.logits_ = LogitsMatrix(npy::read_matrix(o.logits)).matrix();
    lp.kind_ = "logits";
    lp.n_ = lp.logits_->rows;
    lp.k_ = lp.logits_->cols;
    prov.add_input("logits", o.logits);
  } else if (!o.probs.empty()) {
    lp.probs_ = ProbabilityMatrix::ingest(npy::read_matrix(o.probs)).matrix();
    lp.kind_ = "probabilities";
    lp.n_ = lp.probs_->rows;
    lp.k_ = lp.probs_->cols;
    prov.add_input("probabilities", o.probs);
  } else {
    const PassKind kind = o.passes_kind == "logits" ? PassKind::kLogits : PassKind::kProbabilities;
    lp.passes_ = PassStack(npy::read_tensor3(o.passes), kind);
    lp.kind_ = "pass_stack";
    lp.n_ = lp.passes_->samples();
    lp.k_ = lp.passes_->classes();
    prov.add_input("passes", o.passes);
  }

  if (!o.evidence.empty()) {
    Matrix alpha = npy::read_matrix(o.evidence);
    if (alpha.rows != lp.n_ || alpha.cols != lp.k_) {
      throw ValidationError("--evidence shape does not match the predictions");
    }
    evidential_map(alpha);  // validates alpha >= 1
    lp.evidence_ = std::move(alpha);
    prov.add_input("evidence", o.evidence);
  }

  lp.manifest_ = read_manifest(o.manifest);
  prov.add_input("manifest", o.manifest);
  if (lp.manifest_.num_classes && *lp.manifest_.num_classes != lp.k_) {
    throw ValidationError("manifest declares K = " + std::to_string(*lp.manifest_.num_classes) +
                          " but predictions have K = " + std::to_string(lp.k_));
  }
  for (const auto& r : lp.manifest_.rows) {
    if (r.offset >= lp.n_) {
      throw ValidationError("manifest row '" + r.sample_id + "' has offset " +
                            std::to_string(r.offset) + " beyond the " + std::to_string(lp.n_) +
                            " prediction rows");
    }
    if (r.label >= static_cast<int>(lp.k_)) {
      throw ValidationError("manifest label for '" + r.sample_id + "' is >= K");
    }
  }

  if (!o.split.empty()) {
    lp.split_ = read_split(o.split);
    prov.add_input("split", o.split);
    require_disjoint(lp.split_->calibration, lp.split_->evaluation, "calibration", "evaluation");
    require_disjoint(lp.split_->conformal, lp.split_->evaluation, "conformal", "evaluation");
    for (const auto* list : {&lp.split_->calibration, &lp.split_->evaluation, &lp.split_->conformal}) {
      for (const auto& id : *list) lp.manifest_.index_of(id);
    }
  }

  if (!o.calibration.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(o.calibration));
      CalibrationArtifact art;
      art.temperature = j.at("temperature").get<double>();
      art.calibration_ids = j.at("calibration_ids").get<std::vector<std::string>>();
      if (!(art.temperature > 0.0)) throw ValidationError("calibration temperature must be positive");
      lp.calibration_ = std::move(art);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(o.calibration + ": " + e.what());
    }
    prov.add_input("calibration", o.calibration);
  }
  return lp;
}

std::vector<std::size_t> LoadedPredictions::rows_for(const std::vector<std::string>& ids) const {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) rows.push_back(manifest_.index_of(id));
  return rows;
}

std::vector<std::size_t> LoadedPredictions::all_rows() const {
  std::vector<std::size_t> rows(manifest_.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

std::vector<std::size_t> LoadedPredictions::evaluation_rows() const {
  std::vector<std::string> ids;
  if (split_ && !split_->evaluation.empty()) {
    ids = split_->evaluation;
  } else {
    for (const auto& r : manifest_.rows) ids.push_back(r.sample_id);
  }
  if (calibration_) {
    require_disjoint(calibration_->calibration_ids, ids, "the calibration artifact", "evaluation");
  }
  if (ids.empty()) throw ValidationError("no evaluation samples");
  return rows_for(ids);
}

ProbabilityMatrix LoadedPredictions::probabilities(const std::vector<std::size_t>& rows,
                                                   bool calibrated) const {
  if (rows.empty()) throw ValidationError("no samples selected");
  std::vector<std::size_t> offsets(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) offsets[i] = manifest_.rows[rows[i]].offset;
  const double t = calibrated ? temperature() : 1.0;
  const bool scale = calibrated && calibration_;
  if (logits_) return apply_temperature(LogitsMatrix(gather_rows(*logits_, offsets)), t);
  if (probs_) {
    Matrix p = gather_rows(*probs_, offsets);
    if (!scale) return ProbabilityMatrix::wrap(std::move(p));
    return apply_temperature(LogitsMatrix(log_probabilities(p)), t);
  }
  return mean_probability(pass_stack(rows, calibrated));
}

PassStack LoadedPredictions::pass_stack(const std::vector<std::size_t>& rows, bool calibrated) const {
  if (!passes_) throw ValidationError("a pass stack (--passes) is required");
  const auto& src = passes_->tensor();
  const std::size_t t_count = src.d0;
  const bool scale = calibrated && calibration_;
  const bool as_logits = passes_->kind() == PassKind::kLogits || scale;
  Tensor3 out(t_count, rows.size(), k_);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t off = manifest_.rows[rows[i]].offset;
      for (std::size_t j = 0; j < k_; ++j) {
        double v = src(t, off, j);
        if (passes_->kind() == PassKind::kProbabilities && scale) v = std::log(std::max(v, 1e-300));
        if (scale) v /= temperature();
        out(t, i, j) = v;
      }
    }
  }
  return PassStack(std::move(out), as_logits ? PassKind::kLogits : PassKind::kProbabilities);
}

std::vector<double> LoadedPredictions::evidential_mass(const std::vector<std::size_t>& rows) const {
  if (!evidence_) throw ValidationError("evidential confidence needs --evidence");
  std::vector<std::size_t> offsets(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) offsets[i] = manifest_.rows[rows[i]].offset;
  return evidential_map(gather_rows(*evidence_, offsets)).u_mass;
}

LabelVector LoadedPredictions::labels(const std::vector<std::size_t>& rows) const {
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = manifest_.rows[rows[i]];
    if (r.label < 0) throw ValidationError("sample '" + r.sample_id + "' has no label");
    y[i] = r.label;
  }
  return LabelVector(std::move(y), k_);
}

std::vector<std::string> LoadedPredictions::ids(const std::vector<std::size_t>& rows) const {
  std::vector<std::string> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = manifest_.rows[rows[i]].sample_id;
  return out;
}

std::vector<std::string> LoadedPredictions::group_values(const std::vector<std::size_t>& rows,
                                                         const std::string& key) const {
  if (std::find(manifest_.group_columns.begin(), manifest_.group_columns.end(), key) ==
      manifest_.group_columns.end()) {
    throw ValidationError("manifest has no group column '" + key + "'");
  }
  std::vector<std::string> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = manifest_.rows[rows[i]].groups.at(key);
  return out;
}

std::vector<double> confidence_from_source(const std::string& source, const LoadedPredictions& in,
                                           const std::vector<std::size_t>& rows,
                                           const ProbabilityMatrix& p) {
  if (source == "max_probability") return confidences(p);
  if (source == "one_minus_u_tilde") {
    std::vector<double> h(p.samples());
    for (std::size_t n = 0; n < p.samples(); ++n) h[n] = predictive_entropy(p.row(n));
    auto u = normalize_uncertainty(h, p.classes());
    for (double& v : u) v = 1.0 - v;
    return u;
  }
  if (source == "one_minus_u_mass") {
    auto u = in.evidential_mass(rows);
    for (double& v : u) v = 1.0 - v;
    return u;
  }
  throw ValidationError("unknown confidence source '" + source + "'");
}

nlohmann::json bins_to_json(const ReliabilityBins& b) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < b.size(); ++i) {
    arr.push_back({{"lower", b.edges[i]},
                   {"upper", b.edges[i + 1]},
                   {"count", b.count[i]},
                   {"mean_confidence", b.mean_confidence[i] ? nlohmann::json(*b.mean_confidence[i])
                                                            : nlohmann::json(nullptr)},
                   {"accuracy", b.accuracy[i] ? nlohmann::json(*b.accuracy[i]) : nlohmann::json(nullptr)}});
  }
  return arr;
}

}  // namespace uqxai::cli
