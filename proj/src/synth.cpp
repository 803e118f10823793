#include "uqxai/synth.hpp"

#include <cstdio>
#include <sstream>

#include "uqxai/explain.hpp"
#include "uqxai/io.hpp"
#include "uqxai/npy.hpp"
#include "uqxai/rng.hpp"

namespace uqxai {

namespace {

// Independent streams per fixture part, so changing T does not move labels.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SynthConfig::validate() const {
  if (num_classes < 2) throw ValidationError("synth: num_classes must be >= 2");
  if (n_cal + n_test < 1) throw ValidationError("synth: need at least one sample");
  if (passes < 1) throw ValidationError("synth: passes must be >= 1");
  if (!(miscalibration > 0.0)) throw ValidationError("synth: miscalibration c must be positive");
  if (!(logit_scale >= 0.0)) throw ValidationError("synth: logit_scale must be >= 0");
  if (!(pass_noise >= 0.0)) throw ValidationError("synth: pass_noise must be >= 0");
  if (image_size < 1 || cell < 1 || cell > image_size) {
    throw ValidationError("synth: need 1 <= cell <= image_size");
  }
  const std::size_t cells = ((image_size + cell - 1) / cell) * ((image_size + cell - 1) / cell);
  if (cells < num_classes) {
    throw ValidationError("synth: the superpixel grid has fewer cells than classes");
  }
  if (vendors.empty()) throw ValidationError("synth: at least one vendor key is required");
}

nlohmann::json SynthConfig::to_json() const {
  return nlohmann::json{{"seed", seed},
                        {"n_cal", n_cal},
                        {"n_test", n_test},
                        {"num_classes", num_classes},
                        {"passes", passes},
                        {"miscalibration", miscalibration},
                        {"logit_scale", logit_scale},
                        {"pass_noise", pass_noise},
                        {"image_size", image_size},
                        {"cell", cell},
                        {"planted_hi", planted_hi},
                        {"planted_lo", planted_lo},
                        {"vendors", vendors}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.seed = j.value("seed", c.seed);
  c.n_cal = j.value("n_cal", c.n_cal);
  c.n_test = j.value("n_test", c.n_test);
  c.num_classes = j.value("num_classes", c.num_classes);
  c.passes = j.value("passes", c.passes);
  c.miscalibration = j.value("miscalibration", c.miscalibration);
  c.logit_scale = j.value("logit_scale", c.logit_scale);
  c.pass_noise = j.value("pass_noise", c.pass_noise);
  c.image_size = j.value("image_size", c.image_size);
  c.cell = j.value("cell", c.cell);
  c.planted_hi = j.value("planted_hi", c.planted_hi);
  c.planted_lo = j.value("planted_lo", c.planted_lo);
  c.vendors = j.value("vendors", c.vendors);
  return c;
}

std::string SynthFixture::sample_id(std::size_t n) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%06zu", n);
  return buf;
}

SynthFixture generate_fixture(const SynthConfig& config) {
  config.validate();
  SynthFixture fx;
  fx.config = config;
  const std::size_t n = config.n_cal + config.n_test;
  const std::size_t k = config.num_classes;

  Rng logit_rng(derive_seed(config.seed, 0));
  fx.base_logits = Matrix(n, k);
  fx.observed_logits = Matrix(n, k);
  fx.labels.resize(n);
  fx.vendor.resize(n);
  const std::vector<double> vendor_weights(config.vendors.size(),
                                           1.0 / static_cast<double>(config.vendors.size()));
  for (std::size_t i = 0; i < n; ++i) {
    auto z = fx.base_logits.row(i);
    for (double& v : z) v = config.logit_scale * logit_rng.normal();
    const std::vector<double> p = softmax(z);
    fx.labels[i] = static_cast<int>(logit_rng.categorical(p));
    fx.vendor[i] = config.vendors[logit_rng.categorical(vendor_weights)];
    for (std::size_t j = 0; j < k; ++j) fx.observed_logits(i, j) = config.miscalibration * z[j];
  }

  Rng pass_rng(derive_seed(config.seed, 1));
  fx.passes = Tensor3(config.passes, n, k);
  for (std::size_t t = 0; t < config.passes; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double noise = config.pass_noise > 0.0 ? config.pass_noise * pass_rng.normal() : 0.0;
        fx.passes(t, i, j) = fx.observed_logits(i, j) + noise;
      }
    }
  }

  Rng image_rng(derive_seed(config.seed, 2));
  const std::size_t side = config.image_size;
  const SegmentationMap seg = grid_superpixels(side, side, config.cell);
  fx.segmentation = seg.ids();
  std::vector<int> order(seg.count());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = static_cast<int>(s);
  for (std::size_t s = order.size(); s > 1; --s) {
    const auto j = static_cast<std::size_t>(image_rng.uniform() * static_cast<double>(s));
    std::swap(order[s - 1], order[std::min(j, s - 1)]);
  }
  fx.planted_superpixel.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  fx.images = Tensor3(k, side, side);
  for (std::size_t c = 0; c < k; ++c) {
    auto img = fx.images.slice(c);
    for (std::size_t px = 0; px < img.size(); ++px) {
      const bool planted = seg.ids()[px] == fx.planted_superpixel[c];
      img[px] = planted ? 0.7 + 0.3 * image_rng.uniform() : 0.05 + 0.25 * image_rng.uniform();
    }
  }
  return fx;
}

void write_fixture(const SynthFixture& fx, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& cfg = fx.config;
  const std::size_t k = cfg.num_classes;

  npy::write_matrix(dir / "logits.npy", fx.observed_logits);
  npy::write_tensor3(dir / "passes.npy", fx.passes);
  npy::write_tensor3(dir / "images.npy", fx.images);
  std::vector<double> seg(fx.segmentation.begin(), fx.segmentation.end());
  const std::size_t seg_shape[] = {cfg.image_size, cfg.image_size};
  npy::write(dir / "segmentation.npy", seg_shape, seg, npy::Dtype::kInt32);

  Manifest m;
  m.num_classes = k;
  m.group_columns = {"vendor"};
  Split split;
  for (std::size_t i = 0; i < fx.samples(); ++i) {
    ManifestRow r;
    r.sample_id = fx.sample_id(i);
    r.label = fx.labels[i];
    r.offset = i;
    r.groups["vendor"] = fx.vendor[i];
    (i < cfg.n_cal ? split.calibration : split.evaluation).push_back(r.sample_id);
    m.rows.push_back(std::move(r));
  }
  write_file_atomic(dir / "manifest.csv", format_manifest(m));
  write_file_atomic(dir / "split.json", dump_json(split_to_json(split)));

  std::ostringstream planted;
  planted << "class,image_index,superpixel,oracle\n";
  for (std::size_t c = 0; c < k; ++c) {
    const std::string oracle_name = "oracle_" + std::to_string(c) + ".json";
    planted << c << "," << c << "," << fx.planted_superpixel[c] << "," << oracle_name << "\n";
    nlohmann::json o;
    o["mode"] = "builtin";
    o["builtin_name"] = "planted";
    o["batch_limit"] = 256;
    o["reentrant"] = true;
    o["params"] = {{"segmentation", "segmentation.npy"},
                   {"reference", "images.npy"},
                   {"reference_index", c},
                   {"superpixel", fx.planted_superpixel[c]},
                   {"class", c},
                   {"num_classes", k},
                   {"hi", cfg.planted_hi},
                   {"lo", cfg.planted_lo}};
    write_file_atomic(dir / oracle_name, dump_json(o));
  }
  write_file_atomic(dir / "planted.csv", planted.str());

  nlohmann::json meta;
  meta["config"] = cfg.to_json();
  meta["ground_truth_temperature"] = cfg.miscalibration;
  meta["files"] = {{"logits", "logits.npy"},       {"passes", "passes.npy"},
                   {"passes_kind", "logits"},      {"manifest", "manifest.csv"},
                   {"split", "split.json"},        {"images", "images.npy"},
                   {"segmentation", "segmentation.npy"}, {"planted", "planted.csv"}};
  write_file_atomic(dir / "synth.json", dump_json(meta));
}

}  // namespace uqxai
