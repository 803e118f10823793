#include "uqxai/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "uqxai/npy.hpp"

namespace uqxai {

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw ComputationError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string file_digest(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

Provenance::Provenance(std::string command, nlohmann::json config)
    : command_(std::move(command)), config_(std::move(config)) {}

void Provenance::add_input(const std::string& role, const std::filesystem::path& path) {
  inputs_[role] = "sha256:" + file_digest(path);
}

nlohmann::json Provenance::to_json() const {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command_;
  j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  j["config"] = config_;
  j["config_hash"] = "sha256:" + sha256_hex(config_.dump());
  j["input_digests"] = inputs_;
  return j;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 480.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

std::string num(double v, int precision = 2) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

double px(double x) { return kLeft + x * kPlotW; }
double py(double y) { return kTop + (1.0 - y) * kPlotH; }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

void open_svg(std::ostringstream& s, const std::string& title, const std::string& x_label,
              const std::string& y_label) {
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth, 0) << "\" height=\""
    << num(kHeight, 0) << "\" viewBox=\"0 0 " << num(kWidth, 0) << " " << num(kHeight, 0)
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth, 0) << "\" height=\"" << num(kHeight, 0)
    << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  s << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kPlotW)
    << "\" height=\"" << num(kPlotH) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double t = i / 5.0;
    s << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(t))
      << "\" y2=\"" << num(py(0) + 5) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(px(t)) << "\" y=\"" << num(py(0) + 18)
      << "\" text-anchor=\"middle\">" << num(t, 1) << "</text>\n";
    s << "<line x1=\"" << num(px(0) - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(px(0))
      << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(px(0) - 8) << "\" y=\"" << num(py(t) + 4)
      << "\" text-anchor=\"end\">" << num(t, 1) << "</text>\n";
  }
  s << "<text x=\"" << num(kLeft + kPlotW / 2) << "\" y=\"" << num(kHeight - 12)
    << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  s << "<text x=\"16\" y=\"" << num(kTop + kPlotH / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << num(kTop + kPlotH / 2) << ")\">" << escape(y_label) << "</text>\n";
}

}  // namespace

std::string reliability_svg(const ReliabilityBins& bins, const std::string& title) {
  std::ostringstream s;
  open_svg(s, title, "confidence", "accuracy");
  s << "<line x1=\"" << num(px(0)) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(1))
    << "\" y2=\"" << num(py(1)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (!bins.accuracy[b]) continue;
    const double x0 = px(bins.edges[b]);
    const double x1 = px(bins.edges[b + 1]);
    const double acc = *bins.accuracy[b];
    const double conf = *bins.mean_confidence[b];
    s << "<rect x=\"" << num(x0) << "\" y=\"" << num(py(acc)) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(py(0) - py(acc)) << "\" fill=\"#4878b0\" stroke=\"white\">"
      << "<title>bin " << b << ": n=" << bins.count[b] << " acc=" << num(acc, 4)
      << " conf=" << num(conf, 4) << "</title></rect>\n";
    const double lo = std::min(acc, conf);
    const double hi = std::max(acc, conf);
    s << "<rect x=\"" << num(x0) << "\" y=\"" << num(py(hi)) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(py(lo) - py(hi))
      << "\" fill=\"#d0504a\" fill-opacity=\"0.35\" stroke=\"#d0504a\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string risk_coverage_svg(const RiskCoverageCurve& curve, const std::string& title,
                              const SelectivePolicy* policy) {
  std::ostringstream s;
  open_svg(s, title, "coverage", "risk (error rate among accepted)");
  s << "<polyline fill=\"none\" stroke=\"#4878b0\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (i) s << " ";
    s << num(px(curve.points[i].coverage)) << "," << num(py(curve.points[i].risk));
  }
  s << "\"/>\n";
  if (policy && !policy->abstain_all) {
    s << "<line x1=\"" << num(px(policy->coverage)) << "\" y1=\"" << num(py(0)) << "\" x2=\""
      << num(px(policy->coverage)) << "\" y2=\"" << num(py(1))
      << "\" stroke=\"#d0504a\" stroke-dasharray=\"4 3\"/>\n";
    s << "<text x=\"" << num(px(policy->coverage) - 4) << "\" y=\"" << num(kTop + 14)
      << "\" text-anchor=\"end\" fill=\"#d0504a\">target risk " << num(policy->target_risk, 3)
      << "</text>\n";
  }
  s << "<text x=\"" << num(kLeft + 8) << "\" y=\"" << num(kTop + 14) << "\">AURC "
    << num(curve.aurc, 4) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace uqxai
