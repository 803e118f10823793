#include "uqxai/io.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "uqxai/npy.hpp"

namespace uqxai {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

long long parse_int(const std::string& s, const std::string& what, std::size_t line) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("line " + std::to_string(line) + ": invalid " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::size_t Manifest::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("sample id '" + id + "' not in manifest");
  return it->second;
}

void Manifest::build_index() {
  index_.clear();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!index_.emplace(rows[i].sample_id, i).second) {
      throw ValidationError("duplicate sample id '" + rows[i].sample_id + "' in manifest");
    }
  }
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  Manifest m;
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  int id_col = -1;
  int label_col = -1;
  int offset_col = -1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos && trim(line.substr(1, colon - 1)) == "num_classes") {
        m.num_classes = static_cast<std::size_t>(parse_int(trim(line.substr(colon + 1)), "num_classes", line_no));
      }
      continue;
    }
    if (header.empty()) {
      header = split_csv_line(line);
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "sample_id") {
          id_col = static_cast<int>(c);
        } else if (header[c] == "label") {
          label_col = static_cast<int>(c);
        } else if (header[c] == "offset") {
          offset_col = static_cast<int>(c);
        } else {
          m.group_columns.push_back(header[c]);
        }
      }
      if (id_col < 0) throw ValidationError(path.string() + ": header lacks a sample_id column");
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
    }
    ManifestRow r;
    r.sample_id = cells[id_col];
    r.label = label_col >= 0 && !cells[label_col].empty()
                  ? static_cast<int>(parse_int(cells[label_col], "label", line_no))
                  : -1;
    r.offset = offset_col >= 0 ? static_cast<std::size_t>(parse_int(cells[offset_col], "offset", line_no))
                               : m.rows.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (static_cast<int>(c) == id_col || static_cast<int>(c) == label_col ||
          static_cast<int>(c) == offset_col) {
        continue;
      }
      r.groups[header[c]] = cells[c];
    }
    if (m.num_classes && r.label >= static_cast<int>(*m.num_classes)) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": label " +
                            std::to_string(r.label) + " >= declared num_classes");
    }
    m.rows.push_back(std::move(r));
  }
  if (header.empty()) throw ValidationError(path.string() + ": missing CSV header");
  m.build_index();
  return m;
}

std::string format_manifest(const Manifest& m) {
  std::ostringstream out;
  if (m.num_classes) out << "# num_classes: " << *m.num_classes << "\n";
  out << "sample_id,label,offset";
  for (const auto& g : m.group_columns) out << "," << g;
  out << "\n";
  for (const auto& r : m.rows) {
    out << r.sample_id << "," << r.label << "," << r.offset;
    for (const auto& g : m.group_columns) {
      const auto it = r.groups.find(g);
      out << "," << (it == r.groups.end() ? "" : it->second);
    }
    out << "\n";
  }
  return out.str();
}

Split read_split(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  Split s;
  try {
    s.calibration = j.at("calibration").get<std::vector<std::string>>();
    s.evaluation = j.value("evaluation", std::vector<std::string>{});
    s.conformal = j.value("conformal", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return s;
}

nlohmann::json split_to_json(const Split& s) {
  nlohmann::json j;
  j["calibration"] = s.calibration;
  j["evaluation"] = s.evaluation;
  if (!s.conformal.empty()) j["conformal"] = s.conformal;
  return j;
}

void require_disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b,
                      const std::string& a_name, const std::string& b_name) {
  const std::set<std::string> left(a.begin(), a.end());
  for (const auto& id : b) {
    if (left.count(id)) {
      throw ValidationError("split leakage: sample id '" + id + "' is in both " + a_name +
                            " and " + b_name);
    }
  }
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace uqxai
