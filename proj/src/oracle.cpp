#include "uqxai/oracle.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "uqxai/npy.hpp"

namespace uqxai {

namespace {

constexpr double kIntactTolerance = 1e-9;

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

Matrix one_class_rows(std::size_t batch, std::size_t k, int target, std::span<const double> p_target) {
  Matrix out(batch, k);
  for (std::size_t b = 0; b < batch; ++b) {
    const double p = p_target[b];
    const double rest = (1.0 - p) / static_cast<double>(k - 1);
    for (std::size_t j = 0; j < k; ++j) out(b, j) = static_cast<int>(j) == target ? p : rest;
  }
  return out;
}

void require_image_shape(const Tensor3& batch, const SegmentationMap& seg, const Matrix& ref) {
  if (batch.d1 != seg.height() || batch.d2 != seg.width()) {
    throw OracleError("oracle batch images are " + std::to_string(batch.d1) + "x" +
                      std::to_string(batch.d2) + " but the segmentation is " +
                      std::to_string(seg.height()) + "x" + std::to_string(seg.width()));
  }
  if (ref.rows != seg.height() || ref.cols != seg.width()) {
    throw ValidationError("oracle reference image does not match the segmentation shape");
  }
}

void check_target(int target, std::size_t k) {
  if (k < 2) throw ValidationError("oracle needs num_classes >= 2");
  if (target < 0 || static_cast<std::size_t>(target) >= k) {
    throw ValidationError("oracle target class outside [0, K)");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

SegmentationMap load_segmentation(const std::filesystem::path& path) {
  const Matrix m = npy::read_matrix(path);
  std::vector<int> ids(m.data.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(std::llround(m.data[i]));
  return SegmentationMap(m.rows, m.cols, std::move(ids));
}

Matrix load_reference(const std::filesystem::path& path, std::size_t index) {
  npy::Array a = npy::read(path);
  if (a.rank() == 2) return Matrix(a.shape[0], a.shape[1], std::move(a.data));
  if (a.rank() == 3) {
    if (index >= a.shape[0]) throw ValidationError("reference_index outside the image stack");
    const std::size_t plane = a.shape[1] * a.shape[2];
    std::vector<double> v(a.data.begin() + static_cast<std::ptrdiff_t>(index * plane),
                          a.data.begin() + static_cast<std::ptrdiff_t>((index + 1) * plane));
    return Matrix(a.shape[1], a.shape[2], std::move(v));
  }
  throw ValidationError(path.string() + ": reference must be 2-D or 3-D");
}

}  // namespace

SegmentationMap read_segmentation(const std::filesystem::path& path) {
  return load_segmentation(path);
}

Matrix read_image(const std::filesystem::path& path, std::size_t index) {
  return load_reference(path, index);
}

SegmentationMap::SegmentationMap(std::size_t height, std::size_t width, std::vector<int> ids)
    : h_(height), w_(width), ids_(std::move(ids)) {
  if (h_ == 0 || w_ == 0) throw ValidationError("segmentation map is empty");
  if (ids_.size() != h_ * w_) throw ValidationError("segmentation id count does not match shape");
  int max_id = -1;
  for (int id : ids_) {
    if (id < 0) throw ValidationError("negative superpixel id in segmentation map");
    max_id = std::max(max_id, id);
  }
  count_ = static_cast<std::size_t>(max_id) + 1;
  members_.assign(count_, {});
  for (std::size_t i = 0; i < ids_.size(); ++i) members_[ids_[i]].push_back(i);
  for (std::size_t s = 0; s < count_; ++s) {
    if (members_[s].empty()) {
      throw ValidationError("superpixel id " + std::to_string(s) + " never occurs in the map");
    }
  }
}

std::vector<bool> intact_superpixels(std::span<const double> image, std::span<const double> reference,
                                     const SegmentationMap& seg) {
  std::vector<bool> intact(seg.count(), true);
  for (std::size_t s = 0; s < seg.count(); ++s) {
    for (std::size_t px : seg.members()[s]) {
      if (std::abs(image[px] - reference[px]) > kIntactTolerance) {
        intact[s] = false;
        break;
      }
    }
  }
  return intact;
}

// ---------------------------------------------------------------------------

ConstantOracle::ConstantOracle(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() < 2) throw ValidationError("constant oracle needs K >= 2");
  validate_simplex_row(p_, kSimplexTolerance, 0);
}

Matrix ConstantOracle::predict(const Tensor3& batch) {
  Matrix out(batch.d0, p_.size());
  for (std::size_t b = 0; b < batch.d0; ++b) std::copy(p_.begin(), p_.end(), out.row(b).begin());
  return out;
}

PlantedOracle::PlantedOracle(SegmentationMap seg, Matrix reference, int superpixel, int target_class,
                             std::size_t num_classes, double hi, double lo)
    : seg_(std::move(seg)),
      ref_(std::move(reference)),
      superpixel_(superpixel),
      target_(target_class),
      k_(num_classes),
      hi_(hi),
      lo_(lo) {
  check_target(target_, k_);
  if (superpixel_ < 0 || static_cast<std::size_t>(superpixel_) >= seg_.count()) {
    throw ValidationError("planted superpixel id outside the segmentation");
  }
  if (!(hi_ >= 0.0 && hi_ <= 1.0 && lo_ >= 0.0 && lo_ <= 1.0)) {
    throw ValidationError("planted oracle hi/lo must lie in [0,1]");
  }
  if (ref_.rows != seg_.height() || ref_.cols != seg_.width()) {
    throw ValidationError("planted oracle reference does not match the segmentation shape");
  }
}

Matrix PlantedOracle::predict(const Tensor3& batch) {
  require_image_shape(batch, seg_, ref_);
  std::vector<double> p(batch.d0);
  for (std::size_t b = 0; b < batch.d0; ++b) {
    bool intact = true;
    const auto img = batch.slice(b);
    for (std::size_t px : seg_.members()[superpixel_]) {
      if (std::abs(img[px] - ref_.data[px]) > kIntactTolerance) {
        intact = false;
        break;
      }
    }
    p[b] = intact ? hi_ : lo_;
  }
  return one_class_rows(batch.d0, k_, target_, p);
}

LinearMaskOracle::LinearMaskOracle(SegmentationMap seg, Matrix reference,
                                   std::vector<double> coefficients, double intercept,
                                   int target_class, std::size_t num_classes)
    : seg_(std::move(seg)),
      ref_(std::move(reference)),
      coef_(std::move(coefficients)),
      intercept_(intercept),
      target_(target_class),
      k_(num_classes) {
  check_target(target_, k_);
  if (coef_.size() != seg_.count()) {
    throw ValidationError("linear oracle needs one coefficient per superpixel");
  }
  if (ref_.rows != seg_.height() || ref_.cols != seg_.width()) {
    throw ValidationError("linear oracle reference does not match the segmentation shape");
  }
}

Matrix LinearMaskOracle::predict(const Tensor3& batch) {
  require_image_shape(batch, seg_, ref_);
  std::vector<double> p(batch.d0);
  for (std::size_t b = 0; b < batch.d0; ++b) {
    const auto intact = intact_superpixels(batch.slice(b), ref_.data, seg_);
    double v = intercept_;
    for (std::size_t s = 0; s < coef_.size(); ++s) {
      if (intact[s]) v += coef_[s];
    }
    p[b] = std::clamp(v, 0.0, 1.0);
  }
  return one_class_rows(batch.d0, k_, target_, p);
}

// ---------------------------------------------------------------------------

SubprocessOracle::SubprocessOracle(std::string command, std::filesystem::path exchange_dir,
                                   bool reentrant)
    : command_(std::move(command)), dir_(std::move(exchange_dir)), reentrant_(reentrant) {
  if (command_.empty()) throw ValidationError("subprocess oracle command is empty");
}

Matrix SubprocessOracle::predict(const Tensor3& batch) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw OracleError("cannot create oracle exchange dir " + dir_.string());

  const std::size_t call = calls_.fetch_add(1);
  const std::string stem = "call_" + std::to_string(call);
  const auto in_path = dir_ / (stem + "_input.npy");
  const auto out_path = dir_ / (stem + "_output.npy");
  const auto transcript = dir_ / (stem + ".log");

  npy::write_tensor3(in_path, batch);
  std::filesystem::remove(out_path, ec);
  const std::string cmd = command_ + " " + shell_quote(in_path.string()) + " " +
                          shell_quote(out_path.string()) + " > " +
                          shell_quote(transcript.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  {
    std::ofstream log(transcript, std::ios::app);
    log << "\n[uqxai] command: " << cmd << "\n[uqxai] raw status: " << status << "\n";
  }
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw OracleError("oracle command exited with status " +
                      std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : status) +
                      "; transcript: " + transcript.string());
  }

  npy::Array out;
  try {
    out = npy::read(out_path);
  } catch (const std::exception& e) {
    throw OracleError(std::string("malformed oracle output: ") + e.what() +
                      "; transcript: " + transcript.string());
  }
  if (out.rank() != 2 || out.shape[0] != batch.d0) {
    throw OracleError("oracle output must be a " + std::to_string(batch.d0) +
                      " x K tensor; transcript: " + transcript.string());
  }
  std::filesystem::remove(in_path, ec);
  std::filesystem::remove(out_path, ec);
  std::filesystem::remove(transcript, ec);
  return Matrix(out.shape[0], out.shape[1], std::move(out.data));
}

// ---------------------------------------------------------------------------

Oracle::Oracle(std::shared_ptr<OracleBackend> backend, std::size_t batch_limit)
    : backend_(std::move(backend)),
      batch_limit_(batch_limit),
      k_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (!backend_) throw ValidationError("oracle backend is null");
  if (batch_limit_ == 0) throw ValidationError("oracle batch_limit must be >= 1");
}

std::optional<std::size_t> Oracle::classes() const {
  const std::size_t k = k_->load();
  if (k == 0) return std::nullopt;
  return k;
}

ProbabilityMatrix Oracle::predict(const Tensor3& batch) {
  if (batch.d0 == 0) throw ValidationError("oracle batch is empty");
  if (batch.d0 > batch_limit_) {
    throw ValidationError("oracle batch of " + std::to_string(batch.d0) + " exceeds batch_limit " +
                          std::to_string(batch_limit_));
  }
  Matrix rows = backend_->predict(batch);
  if (rows.rows != batch.d0) throw OracleError("oracle returned the wrong number of rows");
  std::size_t expected = 0;
  if (!k_->compare_exchange_strong(expected, rows.cols) && expected != rows.cols) {
    throw OracleError("oracle K changed between calls: " + std::to_string(expected) + " then " +
                      std::to_string(rows.cols));
  }
  try {
    return ProbabilityMatrix::ingest(std::move(rows));
  } catch (const ValidationError& e) {
    throw OracleError(std::string("oracle returned an invalid probability row: ") + e.what());
  }
}

OracleSpec OracleSpec::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  OracleSpec spec;
  spec.base_dir = base_dir;
  const std::string mode = j.value("mode", "builtin");
  if (mode == "builtin") {
    spec.mode = OracleMode::kBuiltin;
    if (j.contains("builtin_name")) spec.builtin_name = j.at("builtin_name").get<std::string>();
    spec.reentrant = j.value("reentrant", true);
  } else if (mode == "subprocess") {
    spec.mode = OracleMode::kSubprocess;
    if (j.contains("command")) spec.command = j.at("command").get<std::string>();
    spec.reentrant = j.value("reentrant", false);
  } else {
    throw ValidationError("oracle mode must be 'builtin' or 'subprocess', got '" + mode + "'");
  }
  if (j.contains("builtin_name") && spec.mode == OracleMode::kSubprocess) {
    throw ValidationError("subprocess oracle spec must not name a builtin");
  }
  if (j.contains("command") && spec.mode == OracleMode::kBuiltin) {
    throw ValidationError("builtin oracle spec must not carry a command");
  }
  spec.batch_limit = j.value("batch_limit", std::size_t{256});
  spec.params = j.value("params", nlohmann::json::object());
  spec.exchange_dir = std::filesystem::temp_directory_path() /
                      ("uqxai-oracle-" + std::to_string(::getpid()));
  spec.validate();
  return spec;
}

void OracleSpec::validate() const {
  if (mode == OracleMode::kBuiltin && (!builtin_name || command)) {
    throw ValidationError("builtin oracle spec needs builtin_name and no command");
  }
  if (mode == OracleMode::kSubprocess && (!command || builtin_name)) {
    throw ValidationError("subprocess oracle spec needs command and no builtin_name");
  }
  if (batch_limit == 0) throw ValidationError("oracle batch_limit must be >= 1");
}

Oracle Oracle::from_spec(const OracleSpec& spec) {
  spec.validate();
  if (spec.mode == OracleMode::kSubprocess) {
    return Oracle(std::make_shared<SubprocessOracle>(*spec.command, spec.exchange_dir, spec.reentrant),
                  spec.batch_limit);
  }
  const auto& p = spec.params;
  const std::string& name = *spec.builtin_name;
  try {
    if (name == "constant") {
      return Oracle(std::make_shared<ConstantOracle>(p.at("probabilities").get<std::vector<double>>()),
                    spec.batch_limit);
    }
    if (name == "planted" || name == "linear") {
      auto seg = load_segmentation(resolve(spec.base_dir, p.at("segmentation").get<std::string>()));
      auto ref = load_reference(resolve(spec.base_dir, p.at("reference").get<std::string>()),
                                p.value("reference_index", std::size_t{0}));
      const int target = p.at("class").get<int>();
      const auto k = p.at("num_classes").get<std::size_t>();
      if (name == "planted") {
        return Oracle(std::make_shared<PlantedOracle>(std::move(seg), std::move(ref),
                                                      p.at("superpixel").get<int>(), target, k,
                                                      p.value("hi", 0.9), p.value("lo", 0.1)),
                      spec.batch_limit);
      }
      return Oracle(std::make_shared<LinearMaskOracle>(
                        std::move(seg), std::move(ref),
                        p.at("coefficients").get<std::vector<double>>(), p.value("intercept", 0.0),
                        target, k),
                    spec.batch_limit);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("oracle '" + name + "' params: " + e.what());
  }
  throw ValidationError("unknown builtin oracle '" + name + "'");
}

}  // namespace uqxai
