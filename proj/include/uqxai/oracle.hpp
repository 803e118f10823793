#pragma once

// Black-box prediction oracles. A backend maps a B x H x W batch of images in
// [0,1] to a B x K matrix of class probabilities; the `Oracle` front end
// enforces batch limits, validates and renormalizes rows, and pins K across
// calls.

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uqxai/core.hpp"

namespace uqxai {

/// Raised on any oracle protocol failure. Maps to CLI exit code 1.
class OracleError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

/// Superpixel assignment: each pixel carries an id in [0, count).
class SegmentationMap {
 public:
  SegmentationMap() = default;
  SegmentationMap(std::size_t height, std::size_t width, std::vector<int> ids);

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t count() const { return count_; }
  int operator()(std::size_t r, std::size_t c) const { return ids_[r * w_ + c]; }
  const std::vector<int>& ids() const { return ids_; }
  /// Flat pixel indices per superpixel.
  const std::vector<std::vector<std::size_t>>& members() const { return members_; }

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::size_t count_ = 0;
  std::vector<int> ids_;
  std::vector<std::vector<std::size_t>> members_;
};

class OracleBackend {
 public:
  virtual ~OracleBackend() = default;
  virtual Matrix predict(const Tensor3& batch) = 0;
  virtual bool reentrant() const = 0;
};

/// Integer-valued H x W .npy file of superpixel ids.
SegmentationMap read_segmentation(const std::filesystem::path& path);

/// An H x W image, or plane `index` of an N x H x W stack.
Matrix read_image(const std::filesystem::path& path, std::size_t index = 0);

enum class OracleMode { kBuiltin, kSubprocess };

struct OracleSpec {
  OracleMode mode = OracleMode::kBuiltin;
  std::optional<std::string> builtin_name;
  std::optional<std::string> command;
  std::size_t batch_limit = 256;
  bool reentrant = false;
  nlohmann::json params;               // builtin parameters
  std::filesystem::path base_dir;      // resolves relative paths in params
  std::filesystem::path exchange_dir;  // subprocess tensor files and transcripts

  /// Parses the oracle JSON document; relative paths resolve against base_dir.
  static OracleSpec from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  void validate() const;
};

class Oracle {
 public:
  explicit Oracle(std::shared_ptr<OracleBackend> backend, std::size_t batch_limit = 256);
  static Oracle from_spec(const OracleSpec& spec);

  /// One simplex row per image. Throws OracleError on failure or when K
  /// changes between calls.
  ProbabilityMatrix predict(const Tensor3& batch);

  std::size_t batch_limit() const { return batch_limit_; }
  bool reentrant() const { return backend_->reentrant(); }
  std::optional<std::size_t> classes() const;

 private:
  std::shared_ptr<OracleBackend> backend_;
  std::size_t batch_limit_;
  std::shared_ptr<std::atomic<std::size_t>> k_;  // 0 until the first call
};

/// Returns p for every image.
class ConstantOracle final : public OracleBackend {
 public:
  explicit ConstantOracle(std::vector<double> p);
  Matrix predict(const Tensor3& batch) override;
  bool reentrant() const override { return true; }

 private:
  std::vector<double> p_;
};

/// Superpixel s is "intact" in an image when all of its pixels match the
/// reference image within 1e-9. Mask-reading builtins are defined in terms of
/// intactness, so they respond to any fill value.
std::vector<bool> intact_superpixels(std::span<const double> image, std::span<const double> reference,
                                     const SegmentationMap& seg);

/// p(target) = hi when the planted superpixel is intact, lo otherwise; the
/// remaining mass is shared evenly by the other classes.
class PlantedOracle final : public OracleBackend {
 public:
  PlantedOracle(SegmentationMap seg, Matrix reference, int superpixel, int target_class,
                std::size_t num_classes, double hi = 0.9, double lo = 0.1);
  Matrix predict(const Tensor3& batch) override;
  bool reentrant() const override { return true; }

 private:
  SegmentationMap seg_;
  Matrix ref_;
  int superpixel_;
  int target_;
  std::size_t k_;
  double hi_;
  double lo_;
};

/// p(target) = clamp(intercept + sum_s coef[s] * intact[s], 0, 1).
class LinearMaskOracle final : public OracleBackend {
 public:
  LinearMaskOracle(SegmentationMap seg, Matrix reference, std::vector<double> coefficients,
                   double intercept, int target_class, std::size_t num_classes);
  Matrix predict(const Tensor3& batch) override;
  bool reentrant() const override { return true; }

 private:
  SegmentationMap seg_;
  Matrix ref_;
  std::vector<double> coef_;
  double intercept_;
  int target_;
  std::size_t k_;
};

/// Runs `command <input.npy> <output.npy>` per batch. The input is a float64
/// B x H x W tensor; the output must be a B x K float32 or float64 tensor.
class SubprocessOracle final : public OracleBackend {
 public:
  SubprocessOracle(std::string command, std::filesystem::path exchange_dir, bool reentrant);
  Matrix predict(const Tensor3& batch) override;
  bool reentrant() const override { return reentrant_; }

 private:
  std::string command_;
  std::filesystem::path dir_;
  bool reentrant_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace uqxai
