#pragma once

#include <cstdint>
#include <vector>

#include "uqxai/core.hpp"
#include "uqxai/oracle.hpp"

namespace uqxai {

enum class FillMode { kMean, kZero };

struct LimeConfig {
  std::size_t n_samples = 1000;
  double kernel_width = 0.25;
  double ridge_lambda = 1.0;
  FillMode fill = FillMode::kMean;
  std::uint64_t seed = 0;
};

struct LimeExplanation {
  std::vector<double> weights;  // one coefficient per superpixel
  double intercept = 0.0;
  double fidelity_r2 = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  int explained_class = 0;
  double normal_equation_residual = 0.0;  // ||A beta - b||_2 of the ridge system
};

struct LimeStability {
  std::vector<double> mean_weight;
  std::vector<double> std_weight;  // sample standard deviation
  std::vector<double> ci_low;      // mean -/+ 1.96 std / sqrt(n)
  std::vector<double> ci_high;
  std::size_t n_repeats = 0;
  bool low_repeat = false;  // fewer than kMinStableRepeats draws
  std::vector<LimeExplanation> runs;
};

inline constexpr std::size_t kMinStableRepeats = 5;

/// D x H x W stack of normalized attribution maps, one per stochastic draw.
class SaliencyStack {
 public:
  SaliencyStack() = default;
  /// Requires every map to already lie in [0,1].
  explicit SaliencyStack(Tensor3 maps);
  /// Applies normalize_map to each raw map.
  static SaliencyStack ingest(const Tensor3& raw);

  std::size_t draws() const { return t_.d0; }
  std::size_t height() const { return t_.d1; }
  std::size_t width() const { return t_.d2; }
  const Tensor3& tensor() const { return t_; }

 private:
  Tensor3 t_;
};

struct ExplanationUncertainty {
  SaliencyMap mean_map;
  Matrix variance_map;
  bool single_draw = false;  // D == 1: variance is zero by convention
};

/// Row-major grid of cell x cell superpixels, edge cells truncated.
SegmentationMap grid_superpixels(std::size_t height, std::size_t width, std::size_t cell);

/// Binary perturbation masks: row 0 all active, the rest Bernoulli(0.5).
std::vector<std::vector<bool>> lime_masks(std::size_t n_samples, std::size_t superpixels,
                                          std::uint64_t seed);

/// Image with inactive superpixels replaced by the fill values.
Matrix perturb_image(const Matrix& image, const SegmentationMap& seg,
                     const std::vector<bool>& active, std::span<const double> fill);

/// Per-superpixel fill value for the given mode.
std::vector<double> fill_values(const Matrix& image, const SegmentationMap& seg, FillMode mode);

/// exp(-d^2 / width^2) with d = 1 - sqrt(active fraction).
double lime_kernel(std::size_t active, std::size_t superpixels, double kernel_width);

LimeExplanation lime_explain(const Matrix& image, Oracle& oracle, const SegmentationMap& seg,
                             int class_index, const LimeConfig& config);

/// Runs seeds base_seed + i * seed_stride for i in [0, n_repeats). A zero
/// stride repeats one seed.
LimeStability lime_repeat(const Matrix& image, Oracle& oracle, const SegmentationMap& seg,
                          int class_index, const LimeConfig& config, std::size_t n_repeats,
                          std::uint64_t seed_stride = 1);

/// Superpixel ids ordered by |weight| descending, ties to the lowest id.
std::vector<std::size_t> rank_by_magnitude(std::span<const double> weights);

/// Paints per-superpixel values onto the pixel grid.
Matrix paint_superpixels(std::span<const double> values, const SegmentationMap& seg);

ExplanationUncertainty aggregate_explanations(const SaliencyStack& stack);

/// Elementwise (1 - u_tilde) * S.
SaliencyMap reliability_weighted_map(const SaliencyMap& s, double u_tilde);

}  // namespace uqxai
