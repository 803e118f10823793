#pragma once

// Report assembly helpers: content digests, provenance blocks, and static SVG
// plots. Nothing here reads a clock; identical inputs give identical bytes.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "uqxai/metrics.hpp"
#include "uqxai/selective.hpp"

namespace uqxai {

inline constexpr std::string_view kToolName = "uqxai";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kReportSchemaVersion = "uqxai.report/1";
inline constexpr std::string_view kBrierConvention =
    "multiclass full-vector sum: mean_n sum_k (p_k - 1[y=k])^2, range [0, 2]";

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

/// Collects the provenance block for one command invocation. Inputs are keyed
/// by a role name, never by path, so relocated inputs digest identically.
class Provenance {
 public:
  Provenance(std::string command, nlohmann::json config);

  void add_input(const std::string& role, const std::filesystem::path& path);
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  nlohmann::json to_json() const;

 private:
  std::string command_;
  nlohmann::json config_;
  std::optional<std::uint64_t> seed_;
  std::map<std::string, std::string> inputs_;
};

std::string reliability_svg(const ReliabilityBins& bins, const std::string& title);
std::string risk_coverage_svg(const RiskCoverageCurve& curve, const std::string& title,
                              const SelectivePolicy* policy = nullptr);

}  // namespace uqxai
