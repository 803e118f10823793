#pragma once

// CSV tables and split files used by the CLI.
//
// Manifest / label CSV:
//   # num_classes: 6            (optional metadata lines, "# key: value")
//   sample_id,label,offset,vendor,...
// `sample_id` and `label` are required; `offset` (row in the tensor files)
// defaults to the data-row index; every other column is a group key.
//
// Split JSON: {"calibration": [ids...], "evaluation": [ids...],
//              "conformal": [ids...] (optional)}

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uqxai/core.hpp"

namespace uqxai {

struct ManifestRow {
  std::string sample_id;
  int label = -1;  // -1 = unlabeled
  std::size_t offset = 0;
  std::map<std::string, std::string> groups;
};

struct Manifest {
  std::optional<std::size_t> num_classes;
  std::vector<std::string> group_columns;
  std::vector<ManifestRow> rows;

  /// Row index by sample id; throws ValidationError on unknown ids.
  std::size_t index_of(const std::string& id) const;
  void build_index();

 private:
  std::map<std::string, std::size_t> index_;
};

Manifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const Manifest& m);

struct Split {
  std::vector<std::string> calibration;
  std::vector<std::string> evaluation;
  std::vector<std::string> conformal;  // empty: reuse calibration ids
};

Split read_split(const std::filesystem::path& path);
nlohmann::json split_to_json(const Split& s);

/// Throws ValidationError naming the first id present in both lists.
void require_disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b,
                      const std::string& a_name, const std::string& b_name);

/// Compact, deterministic JSON text (2-space indent, trailing newline).
std::string dump_json(const nlohmann::json& j);

/// Shortest round-trip text for a double, as used in CSV outputs.
std::string format_double(double v);

}  // namespace uqxai
