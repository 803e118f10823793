#pragma once

// Synthetic fixtures standing in for recorded classifier outputs.
//
// Base logits z are Gaussian; labels are drawn from softmax(z), so softmax(z)
// is calibrated by construction. The observed logits are c * z, making c the
// ground-truth temperature. Pass stacks add per-pass Gaussian noise to the
// observed logits. Each class also gets a textured image with one bright
// planted superpixel and a matching builtin oracle spec.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uqxai/core.hpp"

namespace uqxai {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_cal = 500;
  std::size_t n_test = 5000;
  std::size_t num_classes = 6;
  std::size_t passes = 10;
  double miscalibration = 1.0;  // c
  double logit_scale = 2.0;
  double pass_noise = 0.5;
  std::size_t image_size = 32;
  std::size_t cell = 8;
  double planted_hi = 0.9;
  double planted_lo = 0.1;
  std::vector<std::string> vendors{"vendor_a", "vendor_b", "vendor_c"};

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

struct SynthFixture {
  SynthConfig config;
  Matrix base_logits;      // z
  Matrix observed_logits;  // c * z
  std::vector<int> labels;
  std::vector<std::string> vendor;
  Tensor3 passes;  // T x N x K logits
  Tensor3 images;  // K x H x W
  std::vector<int> segmentation;  // H x W
  std::vector<int> planted_superpixel;  // per class

  std::size_t samples() const { return labels.size(); }
  std::string sample_id(std::size_t n) const;
};

SynthFixture generate_fixture(const SynthConfig& config);

/// Writes logits.npy, passes.npy, manifest.csv, split.json, images.npy,
/// segmentation.npy, planted.csv, oracle_<k>.json and synth.json.
void write_fixture(const SynthFixture& fx, const std::filesystem::path& dir);

}  // namespace uqxai
