#include "uqxai/core.hpp"

#include <algorithm>
#include <cmath>

#include "uqxai/kernels.hpp"

namespace uqxai {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw ValidationError(std::string(what) + ": non-finite value at flat index " +
                            std::to_string(i));
    }
  }
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) throw ValidationError("Matrix: value count does not match shape");
}

Tensor3::Tensor3(std::size_t a, std::size_t b, std::size_t c, std::vector<double> values)
    : d0(a), d1(b), d2(c), data(std::move(values)) {
  if (data.size() != a * b * c) throw ValidationError("Tensor3: value count does not match shape");
}

Matrix Tensor3::slice_matrix(std::size_t i) const {
  auto s = slice(i);
  return Matrix(d1, d2, std::vector<double>(s.begin(), s.end()));
}

void validate_simplex_row(std::span<const double> p, double tolerance, std::size_t row_index) {
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double v = p[k];
    if (!std::isfinite(v) || v < -tolerance || v > 1.0 + tolerance) {
      throw ValidationError("probability row " + std::to_string(row_index) + ": entry " +
                            std::to_string(k) + " = " + std::to_string(v) + " outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw ValidationError("probability row " + std::to_string(row_index) + " sums to " +
                          std::to_string(sum));
  }
}

ProbabilityMatrix ProbabilityMatrix::ingest(Matrix m, double tolerance) {
  if (m.rows < 1 || m.cols < 2) throw ValidationError("probabilities need N >= 1 and K >= 2");
  for (std::size_t n = 0; n < m.rows; ++n) {
    auto r = m.row(n);
    validate_simplex_row(r, tolerance, n);
    double sum = 0.0;
    for (double& v : r) {
      v = std::clamp(v, 0.0, 1.0);
      sum += v;
    }
    for (double& v : r) v /= sum;
  }
  return ProbabilityMatrix(std::move(m));
}

ProbabilityMatrix ProbabilityMatrix::wrap(Matrix m) {
  if (m.rows < 1 || m.cols < 2) throw ValidationError("probabilities need N >= 1 and K >= 2");
  for (std::size_t n = 0; n < m.rows; ++n) validate_simplex_row(m.row(n), 1e-9, n);
  return ProbabilityMatrix(std::move(m));
}

LogitsMatrix::LogitsMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows < 1 || m_.cols < 2) throw ValidationError("logits need N >= 1 and K >= 2");
  require_finite(m_.data, "logits");
}

PassStack::PassStack(Tensor3 passes, PassKind kind) : t_(std::move(passes)), kind_(kind) {
  if (t_.d0 < 1) throw ValidationError("pass stack is empty (T = 0)");
  if (t_.d1 < 1 || t_.d2 < 2) throw ValidationError("pass stack needs N >= 1 and K >= 2");
  require_finite(t_.data, "pass stack");
  if (kind_ == PassKind::kProbabilities) {
    const std::size_t rows = t_.d0 * t_.d1;
    for (std::size_t r = 0; r < rows; ++r) {
      std::span<const double> row(t_.data.data() + r * t_.d2, t_.d2);
      validate_simplex_row(row, kSimplexTolerance, r);
    }
  }
}

Tensor3 PassStack::probabilities() const {
  if (kind_ == PassKind::kProbabilities) return t_;
  Tensor3 out(t_.d0, t_.d1, t_.d2);
  kernels::softmax_rows(t_.data, t_.d2, 1.0, out.data);
  return out;
}

LabelVector::LabelVector(std::vector<int> labels, std::size_t num_classes)
    : y_(std::move(labels)), k_(num_classes) {
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (y_[i] < 0 || static_cast<std::size_t>(y_[i]) >= k_) {
      throw ValidationError("label " + std::to_string(y_[i]) + " at index " + std::to_string(i) +
                            " outside [0, " + std::to_string(k_) + ")");
    }
  }
}

SaliencyMap::SaliencyMap(Matrix values, bool normalized)
    : m_(std::move(values)), normalized_(normalized) {
  require_finite(m_.data, "saliency map");
  if (normalized_) {
    for (double v : m_.data) {
      if (v < 0.0 || v > 1.0) throw ValidationError("normalized saliency map outside [0,1]");
    }
  }
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<double> softmax(std::span<const double> z) {
  if (z.empty()) throw ValidationError("softmax of an empty vector");
  require_finite(z, "softmax input");
  std::vector<double> out(z.size());
  kernels::softmax_rows(z, z.size(), 1.0, out);
  return out;
}

SaliencyMap normalize_map(const SaliencyMap& m) {
  const auto& src = m.values();
  Matrix out(src.rows, src.cols, 0.0);
  if (src.data.empty()) return SaliencyMap(std::move(out), true);
  const auto [lo_it, hi_it] = std::minmax_element(src.data.begin(), src.data.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi > lo) {
    const double span = hi - lo;
    for (std::size_t i = 0; i < src.data.size(); ++i) {
      out.data[i] = std::clamp((src.data[i] - lo) / span, 0.0, 1.0);
    }
  }
  return SaliencyMap(std::move(out), true);
}

ProbabilityMatrix mean_probability(const PassStack& stack) {
  const Tensor3 probs = stack.probabilities();
  Matrix mean(stack.samples(), stack.classes());
  kernels::mean_over_passes(probs.data, probs.d0, probs.d1, probs.d2, mean.data);
  return ProbabilityMatrix::wrap(std::move(mean));
}

}  // namespace uqxai
