#include "uqxai/explain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "uqxai/kernels.hpp"
#include "uqxai/log.hpp"
#include "uqxai/rng.hpp"

namespace uqxai {

SaliencyStack::SaliencyStack(Tensor3 maps) : t_(std::move(maps)) {
  if (t_.d0 < 1) throw ValidationError("saliency stack is empty");
  for (double v : t_.data) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ValidationError("saliency stack entries must be normalized to [0,1]");
    }
  }
}

SaliencyStack SaliencyStack::ingest(const Tensor3& raw) {
  if (raw.d0 < 1) throw ValidationError("saliency stack is empty");
  Tensor3 out(raw.d0, raw.d1, raw.d2);
  for (std::size_t d = 0; d < raw.d0; ++d) {
    const SaliencyMap m = normalize_map(SaliencyMap(raw.slice_matrix(d), false));
    std::copy(m.values().data.begin(), m.values().data.end(), out.slice(d).begin());
  }
  return SaliencyStack(std::move(out));
}

SegmentationMap grid_superpixels(std::size_t height, std::size_t width, std::size_t cell) {
  if (height == 0 || width == 0) throw ValidationError("grid_superpixels: empty image");
  if (cell < 1) throw ValidationError("grid_superpixels: cell must be >= 1");
  if (cell > std::min(height, width)) {
    log_warning("superpixel cell " + std::to_string(cell) +
                " exceeds the image extent; using a single superpixel");
    return SegmentationMap(height, width, std::vector<int>(height * width, 0));
  }
  const std::size_t cells_x = (width + cell - 1) / cell;
  std::vector<int> ids(height * width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      ids[r * width + c] = static_cast<int>((r / cell) * cells_x + c / cell);
    }
  }
  return SegmentationMap(height, width, std::move(ids));
}

std::vector<std::vector<bool>> lime_masks(std::size_t n_samples, std::size_t superpixels,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<bool>> masks(n_samples, std::vector<bool>(superpixels, true));
  for (std::size_t i = 1; i < n_samples; ++i) {
    for (std::size_t s = 0; s < superpixels; ++s) masks[i][s] = rng.bernoulli(0.5);
  }
  return masks;
}

std::vector<double> fill_values(const Matrix& image, const SegmentationMap& seg, FillMode mode) {
  std::vector<double> fill(seg.count(), 0.0);
  if (mode == FillMode::kZero) return fill;
  for (std::size_t s = 0; s < seg.count(); ++s) {
    double sum = 0.0;
    for (std::size_t px : seg.members()[s]) sum += image.data[px];
    fill[s] = sum / static_cast<double>(seg.members()[s].size());
  }
  return fill;
}

Matrix perturb_image(const Matrix& image, const SegmentationMap& seg,
                     const std::vector<bool>& active, std::span<const double> fill) {
  Matrix out = image;
  for (std::size_t s = 0; s < seg.count(); ++s) {
    if (active[s]) continue;
    for (std::size_t px : seg.members()[s]) out.data[px] = fill[s];
  }
  return out;
}

double lime_kernel(std::size_t active, std::size_t superpixels, double kernel_width) {
  const double frac = static_cast<double>(active) / static_cast<double>(superpixels);
  const double d = 1.0 - std::sqrt(frac);
  return std::exp(-(d * d) / (kernel_width * kernel_width));
}

namespace {

void validate_lime_inputs(const Matrix& image, const SegmentationMap& seg, int class_index,
                          const LimeConfig& config) {
  if (image.rows != seg.height() || image.cols != seg.width()) {
    throw ValidationError("LIME image is " + std::to_string(image.rows) + "x" +
                          std::to_string(image.cols) + " but the segmentation is " +
                          std::to_string(seg.height()) + "x" + std::to_string(seg.width()));
  }
  for (double v : image.data) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("LIME image values must lie in [0,1]");
  }
  if (class_index < 0) throw ValidationError("LIME class index must be non-negative");
  if (config.n_samples < seg.count() + 1) {
    throw ValidationError("LIME needs n_samples >= superpixels + 1 (" +
                          std::to_string(seg.count() + 1) + "), got " +
                          std::to_string(config.n_samples));
  }
  if (!(config.kernel_width > 0.0)) throw ValidationError("LIME kernel_width must be positive");
  if (!(config.ridge_lambda >= 0.0)) throw ValidationError("LIME ridge_lambda must be >= 0");
}

/// Oracle probability of `class_index` for every mask, evaluated in batches.
std::vector<double> query_oracle(const Matrix& image, Oracle& oracle, const SegmentationMap& seg,
                                 int class_index, const std::vector<std::vector<bool>>& masks,
                                 std::span<const double> fill) {
  const std::size_t n = masks.size();
  const std::size_t limit = oracle.batch_limit();
  const std::size_t batches = (n + limit - 1) / limit;
  const std::size_t plane = image.rows * image.cols;
  std::vector<double> target(n);
  std::vector<std::exception_ptr> failures(batches);

  auto run_batch = [&](std::size_t b) {
    try {
      const std::size_t begin = b * limit;
      const std::size_t end = std::min(n, begin + limit);
      Tensor3 batch(end - begin, image.rows, image.cols);
      for (std::size_t i = begin; i < end; ++i) {
        const Matrix img = perturb_image(image, seg, masks[i], fill);
        std::copy(img.data.begin(), img.data.end(), batch.data.begin() + static_cast<std::ptrdiff_t>((i - begin) * plane));
      }
      const ProbabilityMatrix p = oracle.predict(batch);
      if (static_cast<std::size_t>(class_index) >= p.classes()) {
        throw ValidationError("LIME class " + std::to_string(class_index) +
                              " outside the oracle's K = " + std::to_string(p.classes()));
      }
      for (std::size_t i = begin; i < end; ++i) target[i] = p.row(i - begin)[class_index];
    } catch (...) {
      failures[b] = std::current_exception();
    }
  };

  if (oracle.reentrant()) {
    const auto count = static_cast<std::int64_t>(batches);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < count; ++b) run_batch(static_cast<std::size_t>(b));
  } else {
    for (std::size_t b = 0; b < batches; ++b) {
      run_batch(b);
      if (failures[b]) break;
    }
  }

  for (std::size_t b = 0; b < batches; ++b) {
    if (!failures[b]) continue;
    try {
      std::rethrow_exception(failures[b]);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw OracleError("oracle failed on batch " + std::to_string(b) + ": " + e.what());
    }
  }
  return target;
}

}  // namespace

LimeExplanation lime_explain(const Matrix& image, Oracle& oracle, const SegmentationMap& seg,
                             int class_index, const LimeConfig& config) {
  validate_lime_inputs(image, seg, class_index, config);
  const std::size_t n = config.n_samples;
  const std::size_t s_count = seg.count();
  const std::size_t dim = s_count + 1;  // intercept first, unpenalized

  const auto masks = lime_masks(n, s_count, config.seed);
  const auto fill = fill_values(image, seg, config.fill);
  const std::vector<double> y = query_oracle(image, oracle, seg, class_index, masks, fill);

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto active = static_cast<std::size_t>(std::count(masks[i].begin(), masks[i].end(), true));
    w[i] = lime_kernel(active, s_count, config.kernel_width);
  }

  // Normal equations (X^T W X + lambda D) beta = X^T W y, D = diag(0, 1, ..., 1).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  std::vector<Eigen::Index> on;
  on.reserve(dim);
  for (std::size_t i = 0; i < n; ++i) {
    on.clear();
    on.push_back(0);
    for (std::size_t s = 0; s < s_count; ++s) {
      if (masks[i][s]) on.push_back(static_cast<Eigen::Index>(s + 1));
    }
    for (Eigen::Index r : on) {
      rhs(r) += w[i] * y[i];
      for (Eigen::Index c : on) a(r, c) += w[i];
    }
  }
  for (std::size_t s = 1; s < dim; ++s) {
    a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) += config.ridge_lambda;
  }

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw ComputationError("LIME ridge system is singular");
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  if (!beta.allFinite()) throw ComputationError("LIME ridge solve produced non-finite weights");

  LimeExplanation ex;
  ex.intercept = beta(0);
  ex.weights.assign(beta.data() + 1, beta.data() + dim);
  ex.n_samples = n;
  ex.seed = config.seed;
  ex.explained_class = class_index;
  ex.normal_equation_residual = (a * beta - rhs).norm();

  double w_sum = 0.0;
  double wy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w_sum += w[i];
    wy += w[i] * y[i];
  }
  const double y_bar = wy / w_sum;
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = ex.intercept;
    for (std::size_t s = 0; s < s_count; ++s) {
      if (masks[i][s]) fit += ex.weights[s];
    }
    ss_res += w[i] * (y[i] - fit) * (y[i] - fit);
    ss_tot += w[i] * (y[i] - y_bar) * (y[i] - y_bar);
  }
  // A constant target is fit perfectly by the intercept alone.
  ex.fidelity_r2 = ss_tot > 1e-300 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return ex;
}

LimeStability lime_repeat(const Matrix& image, Oracle& oracle, const SegmentationMap& seg,
                          int class_index, const LimeConfig& config, std::size_t n_repeats,
                          std::uint64_t seed_stride) {
  if (n_repeats < 2) throw ValidationError("lime_repeat needs n_repeats >= 2");
  LimeStability st;
  st.n_repeats = n_repeats;
  st.low_repeat = n_repeats < kMinStableRepeats;
  if (st.low_repeat) {
    log_warning("LIME stability from only " + std::to_string(n_repeats) + " repeats");
  }
  for (std::size_t r = 0; r < n_repeats; ++r) {
    LimeConfig c = config;
    c.seed = config.seed + r * seed_stride;
    st.runs.push_back(lime_explain(image, oracle, seg, class_index, c));
  }
  const std::size_t s_count = seg.count();
  st.mean_weight.assign(s_count, 0.0);
  st.std_weight.assign(s_count, 0.0);
  st.ci_low.resize(s_count);
  st.ci_high.resize(s_count);
  const double nr = static_cast<double>(n_repeats);
  for (std::size_t s = 0; s < s_count; ++s) {
    double sum = 0.0;
    for (const auto& run : st.runs) sum += run.weights[s];
    const double mean = sum / nr;
    double ss = 0.0;
    for (const auto& run : st.runs) ss += (run.weights[s] - mean) * (run.weights[s] - mean);
    const double sd = std::sqrt(ss / (nr - 1.0));
    const double half = 1.96 * sd / std::sqrt(nr);
    st.mean_weight[s] = mean;
    st.std_weight[s] = sd;
    st.ci_low[s] = mean - half;
    st.ci_high[s] = mean + half;
  }
  return st;
}

std::vector<std::size_t> rank_by_magnitude(std::span<const double> weights) {
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(weights[a]) > std::abs(weights[b]);
  });
  return order;
}

Matrix paint_superpixels(std::span<const double> values, const SegmentationMap& seg) {
  if (values.size() != seg.count()) throw ValidationError("one value per superpixel required");
  Matrix out(seg.height(), seg.width());
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = values[seg.ids()[i]];
  return out;
}

ExplanationUncertainty aggregate_explanations(const SaliencyStack& stack) {
  const auto& t = stack.tensor();
  const std::size_t pixels = t.d1 * t.d2;
  Matrix mean(t.d1, t.d2);
  Matrix var(t.d1, t.d2);
  kernels::pixel_mean_variance(t.data, t.d0, pixels, mean.data, var.data);
  for (double& v : mean.data) v = std::clamp(v, 0.0, 1.0);
  ExplanationUncertainty out{SaliencyMap(std::move(mean), true), std::move(var), t.d0 == 1};
  if (out.single_draw) log_warning("single saliency draw: variance map is zero by convention");
  return out;
}

SaliencyMap reliability_weighted_map(const SaliencyMap& s, double u_tilde) {
  if (!(u_tilde >= 0.0 && u_tilde <= 1.0)) {
    throw ValidationError("u_tilde must lie in [0,1], got " + std::to_string(u_tilde));
  }
  if (!s.normalized()) throw ValidationError("reliability weighting needs a normalized map");
  Matrix out = s.values();
  const double scale = 1.0 - u_tilde;
  for (double& v : out.data) v *= scale;
  return SaliencyMap(std::move(out), true);
}

}  // namespace uqxai
