#include <filesystem>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "uqxai/explain.hpp"
#include "uqxai/log.hpp"
#include "uqxai/npy.hpp"
#include "uqxai/oracle.hpp"
#include "uqxai/uncertainty.hpp"

namespace uqxai::cli {

namespace {

struct UTilde {
  double value = 0.0;
  std::string source;
};

std::optional<UTilde> resolve_u_tilde(const ExplainOptions& o, Provenance& prov) {
  const int given = o.u_tilde.has_value() + !o.passes.empty() + !o.evidence.empty();
  if (given == 0) return std::nullopt;
  if (given > 1) throw ValidationError("give at most one of --u-tilde, --passes, --evidence");
  if (o.u_tilde) {
    if (!(*o.u_tilde >= 0.0 && *o.u_tilde <= 1.0)) throw ValidationError("--u-tilde must lie in [0, 1]");
    return UTilde{*o.u_tilde, "user"};
  }
  if (!o.passes.empty()) {
    const PassKind kind = o.passes_kind == "logits" ? PassKind::kLogits : PassKind::kProbabilities;
    const PassStack stack(npy::read_tensor3(o.passes), kind);
    prov.add_input("passes", o.passes);
    if (o.sample_index >= stack.samples()) throw ValidationError("--sample-index outside the pass stack");
    const ProbabilityMatrix p = mean_probability(stack);
    const double h = predictive_entropy(p.row(o.sample_index));
    return UTilde{normalize_uncertainty(std::span<const double>(&h, 1), stack.classes())[0],
                  "predictive_entropy"};
  }
  const Matrix alpha = npy::read_matrix(o.evidence);
  prov.add_input("evidence", o.evidence);
  if (o.sample_index >= alpha.rows) throw ValidationError("--sample-index outside the evidence matrix");
  return UTilde{evidential_map(alpha).u_mass[o.sample_index], "evidential_u_mass"};
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ",";
    s += c;
    first = false;
  }
  return s + "\n";
}

}  // namespace

CLI::App* add_explain(CLI::App& app, ExplainOptions& o) {
  auto* sub = app.add_subcommand("explain", "LIME explanations with stability and reliability weighting");
  add_common_options(sub, o.common, true);
  sub->add_option("--image", o.image, "H x W image or N x H x W stack (.npy), values in [0,1]");
  sub->add_option("--image-index", o.image_index, "Plane of a 3-D image stack")->capture_default_str();
  sub->add_option("--oracle", o.oracle, "Oracle spec JSON");
  sub->add_option("--segmentation", o.segmentation, "Superpixel id map (.npy); default is a grid");
  sub->add_option("--cell", o.cell, "Grid cell size when no segmentation is given")->capture_default_str();
  sub->add_option("--class-index", o.class_index, "Class to explain; -1 uses the oracle's top class")
      ->capture_default_str();
  sub->add_option("--n-samples", o.n_samples, "Perturbations per run")->capture_default_str();
  sub->add_option("--kernel-width", o.kernel_width, "Locality kernel width")->capture_default_str();
  sub->add_option("--ridge-lambda", o.ridge_lambda, "Ridge penalty")->capture_default_str();
  sub->add_option("--fill", o.fill, "mean | zero")->check(CLI::IsMember({"mean", "zero"}))->capture_default_str();
  sub->add_option("--repeats", o.repeats, "Seeds for the stability analysis")->capture_default_str();
  sub->add_option("--top-k", o.top_k, "Superpixels listed in explanation.json (0 = all)")->capture_default_str();
  sub->add_option("--saliency", o.saliency, "D x H x W saliency stack (.npy) to aggregate instead of LIME maps");
  sub->add_option("--u-tilde", o.u_tilde, "Normalized uncertainty for the reliability-weighted map");
  sub->add_option("--passes", o.passes, "Pass stack (.npy) supplying u-tilde for --sample-index");
  sub->add_option("--passes-kind", o.passes_kind, "logits | probabilities")
      ->check(CLI::IsMember({"logits", "probabilities"}));
  sub->add_option("--evidence", o.evidence, "Dirichlet concentrations (.npy) supplying u_mass");
  sub->add_option("--sample-index", o.sample_index, "Row of --passes / --evidence")->capture_default_str();
  return sub;
}

void run_explain(const ExplainOptions& o) {
  const std::uint64_t seed = require_seed(o.common, "explain");
  if (o.common.out.empty()) throw ValidationError("--out is mandatory");
  if (o.image.empty()) throw ValidationError("--image is mandatory");
  if (o.oracle.empty()) throw ValidationError("--oracle is mandatory");
  if (o.repeats < 2) throw ValidationError("--repeats must be >= 2");

  nlohmann::json config{{"image_index", o.image_index}, {"cell", o.cell},
                        {"class_index", o.class_index}, {"n_samples", o.n_samples},
                        {"kernel_width", o.kernel_width}, {"ridge_lambda", o.ridge_lambda},
                        {"fill", o.fill}, {"repeats", o.repeats},
                        {"top_k", o.top_k}, {"segmentation", o.segmentation.empty() ? "grid" : "file"},
                        {"sample_index", o.sample_index},
                        {"u_tilde", o.u_tilde ? nlohmann::json(*o.u_tilde) : nlohmann::json(nullptr)}};
  Provenance prov("explain", config);
  prov.set_seed(seed);

  const Matrix image = read_image(o.image, o.image_index);
  prov.add_input("image", o.image);
  nlohmann::json spec_json;
  try {
    spec_json = nlohmann::json::parse(read_file(o.oracle));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(o.oracle + ": " + e.what());
  }
  prov.add_input("oracle", o.oracle);
  const OracleSpec spec =
      OracleSpec::from_json(spec_json, std::filesystem::path(o.oracle).parent_path());
  Oracle oracle = Oracle::from_spec(spec);

  SegmentationMap seg;
  if (!o.segmentation.empty()) {
    seg = read_segmentation(o.segmentation);
    prov.add_input("segmentation", o.segmentation);
  } else {
    seg = grid_superpixels(image.rows, image.cols, o.cell);
  }
  if (seg.height() != image.rows || seg.width() != image.cols) {
    throw ValidationError("segmentation shape does not match the image");
  }

  int cls = o.class_index;
  Tensor3 single(1, image.rows, image.cols, image.data);
  const ProbabilityMatrix p0 = oracle.predict(single);
  if (cls < 0) {
    cls = static_cast<int>(argmax(p0.row(0)));
  } else if (static_cast<std::size_t>(cls) >= p0.classes()) {
    throw ValidationError("--class-index outside the oracle's classes");
  }

  const auto u = resolve_u_tilde(o, prov);

  LimeConfig lc;
  lc.n_samples = o.n_samples;
  lc.kernel_width = o.kernel_width;
  lc.ridge_lambda = o.ridge_lambda;
  lc.fill = o.fill == "zero" ? FillMode::kZero : FillMode::kMean;
  lc.seed = seed;
  const LimeStability stab = lime_repeat(image, oracle, seg, cls, lc, o.repeats);
  if (stab.low_repeat) {
    log_warning("explain: fewer than " + std::to_string(kMinStableRepeats) +
                " repeats; stability intervals are unreliable");
  }

  SaliencyStack saliency;
  std::string saliency_source;
  if (!o.saliency.empty()) {
    saliency = SaliencyStack::ingest(npy::read_tensor3(o.saliency));
    prov.add_input("saliency", o.saliency);
    saliency_source = "saliency_stack";
    if (saliency.height() != image.rows || saliency.width() != image.cols) {
      throw ValidationError("saliency stack shape does not match the image");
    }
  } else {
    Tensor3 raw(stab.runs.size(), image.rows, image.cols);
    for (std::size_t r = 0; r < stab.runs.size(); ++r) {
      std::vector<double> mag(stab.runs[r].weights.size());
      for (std::size_t s = 0; s < mag.size(); ++s) mag[s] = std::abs(stab.runs[r].weights[s]);
      const Matrix m = paint_superpixels(mag, seg);
      std::copy(m.data.begin(), m.data.end(), raw.slice(r).begin());
    }
    saliency = SaliencyStack::ingest(raw);
    saliency_source = "lime_abs_weights";
  }
  const ExplanationUncertainty agg = aggregate_explanations(saliency);

  const auto ranking = rank_by_magnitude(stab.mean_weight);
  std::ostringstream weights;
  weights << "rank,superpixel,weight,abs_weight\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const double w = stab.mean_weight[ranking[r]];
    weights << csv_row({std::to_string(r + 1), std::to_string(ranking[r]), format_double(w),
                        format_double(std::abs(w))});
  }
  std::ostringstream stability;
  stability << "superpixel,mean,std,ci_low,ci_high\n";
  for (std::size_t s = 0; s < stab.mean_weight.size(); ++s) {
    stability << csv_row({std::to_string(s), format_double(stab.mean_weight[s]),
                          format_double(stab.std_weight[s]), format_double(stab.ci_low[s]),
                          format_double(stab.ci_high[s])});
  }

  nlohmann::json j;
  j["explained_class"] = cls;
  j["oracle_probability"] = p0.row(0)[static_cast<std::size_t>(cls)];
  j["superpixels"] = seg.count();
  j["repeats"] = stab.n_repeats;
  j["low_repeat"] = stab.low_repeat;
  j["seeds"] = nlohmann::json::array();
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : stab.runs) {
    j["seeds"].push_back(r.seed);
    runs.push_back({{"seed", r.seed},
                    {"intercept", r.intercept},
                    {"fidelity_r2", r.fidelity_r2},
                    {"normal_equation_residual", r.normal_equation_residual}});
  }
  j["runs"] = runs;
  const std::size_t k = o.top_k == 0 ? ranking.size() : std::min(o.top_k, ranking.size());
  nlohmann::json top = nlohmann::json::array();
  for (std::size_t r = 0; r < k; ++r) {
    top.push_back({{"superpixel", ranking[r]}, {"weight", stab.mean_weight[ranking[r]]}});
  }
  j["top_superpixels"] = top;
  j["saliency_source"] = saliency_source;
  j["saliency_draws"] = saliency.draws();
  j["single_draw"] = agg.single_draw;
  if (u) {
    j["u_tilde"] = {{"value", u->value}, {"source", u->source}};
  } else {
    j["u_tilde"] = nullptr;
  }
  j["files"] = {{"weights", "weights.csv"}, {"stability", "stability.csv"},
                {"mean_map", "mean_map.npy"}, {"variance_map", "variance_map.npy"},
                {"s_rel", u ? nlohmann::json("s_rel.npy") : nlohmann::json(nullptr)}};
  j["provenance"] = prov.to_json();

  ensure_out_dir(o.common.out);
  const std::filesystem::path out(o.common.out);
  write_file_atomic(out / "weights.csv", weights.str());
  write_file_atomic(out / "stability.csv", stability.str());
  npy::write_matrix(out / "mean_map.npy", agg.mean_map.values());
  npy::write_matrix(out / "variance_map.npy", agg.variance_map);
  if (u) {
    npy::write_matrix(out / "s_rel.npy", reliability_weighted_map(agg.mean_map, u->value).values());
  }
  write_file_atomic(out / "explanation.json", dump_json(j));

  std::cout << "explain: class " << cls << "  top superpixel " << ranking.front() << " (weight "
            << stab.mean_weight[ranking.front()] << ")  repeats " << stab.n_repeats;
  if (u) std::cout << "  u-tilde " << u->value;
  std::cout << "\n";
}

}  // namespace uqxai::cli
