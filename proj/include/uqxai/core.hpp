#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uqxai {

/// Raised when an input violates a documented precondition or invariant.
/// Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a well-formed input cannot be processed. Maps to exit code 1.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSimplexTolerance = 1e-6;

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

/// Dense row-major rank-3 tensor (d0 x d1 x d2).
struct Tensor3 {
  std::size_t d0 = 0;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(std::size_t a, std::size_t b, std::size_t c, double fill = 0.0)
      : d0(a), d1(b), d2(c), data(a * b * c, fill) {}
  Tensor3(std::size_t a, std::size_t b, std::size_t c, std::vector<double> values);

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * d1 + j) * d2 + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * d1 + j) * d2 + k];
  }

  std::size_t slice_size() const { return d1 * d2; }
  std::span<double> slice(std::size_t i) { return {data.data() + i * slice_size(), slice_size()}; }
  std::span<const double> slice(std::size_t i) const {
    return {data.data() + i * slice_size(), slice_size()};
  }
  Matrix slice_matrix(std::size_t i) const;

  bool operator==(const Tensor3&) const = default;
};

/// N x K matrix whose rows lie on the probability simplex.
class ProbabilityMatrix {
 public:
  ProbabilityMatrix() = default;

  /// Validates rows against the ingestion tolerance and divides each row by
  /// its sum. Use for data arriving from files or oracles.
  static ProbabilityMatrix ingest(Matrix m, double tolerance = kSimplexTolerance);

  /// Validates rows tightly (1e-9) without renormalizing. Use for values
  /// produced in-process (softmax, convex combinations).
  static ProbabilityMatrix wrap(Matrix m);

  std::size_t samples() const { return m_.rows; }
  std::size_t classes() const { return m_.cols; }
  std::span<const double> row(std::size_t n) const { return m_.row(n); }
  const Matrix& matrix() const { return m_; }

 private:
  explicit ProbabilityMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// N x K matrix of finite logits.
class LogitsMatrix {
 public:
  LogitsMatrix() = default;
  explicit LogitsMatrix(Matrix m);

  std::size_t samples() const { return m_.rows; }
  std::size_t classes() const { return m_.cols; }
  std::span<const double> row(std::size_t n) const { return m_.row(n); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

enum class PassKind { kLogits, kProbabilities };

/// T x N x K stack of stochastic forward passes or ensemble members.
class PassStack {
 public:
  PassStack() = default;
  PassStack(Tensor3 passes, PassKind kind);

  std::size_t passes() const { return t_.d0; }
  std::size_t samples() const { return t_.d1; }
  std::size_t classes() const { return t_.d2; }
  PassKind kind() const { return kind_; }
  const Tensor3& tensor() const { return t_; }

  /// Every (t, n) row mapped to the simplex; logits are softmaxed.
  Tensor3 probabilities() const;

 private:
  Tensor3 t_;
  PassKind kind_ = PassKind::kProbabilities;
};

/// Ground-truth labels, each in [0, K).
class LabelVector {
 public:
  LabelVector() = default;
  LabelVector(std::vector<int> labels, std::size_t num_classes);

  std::size_t size() const { return y_.size(); }
  std::size_t classes() const { return k_; }
  int operator[](std::size_t i) const { return y_[i]; }
  const std::vector<int>& values() const { return y_; }

 private:
  std::vector<int> y_;
  std::size_t k_ = 0;
};

/// H x W attribution map.
class SaliencyMap {
 public:
  SaliencyMap() = default;
  /// Validates finiteness; normalized maps must also lie in [0,1].
  SaliencyMap(Matrix values, bool normalized);

  const Matrix& values() const { return m_; }
  bool normalized() const { return normalized_; }
  std::size_t height() const { return m_.rows; }
  std::size_t width() const { return m_.cols; }

 private:
  Matrix m_;
  bool normalized_ = false;
};

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

/// Throws ValidationError unless `p` lies on the simplex within `tolerance`.
void validate_simplex_row(std::span<const double> p, double tolerance, std::size_t row_index);

/// Numerically stable softmax (max subtraction).
std::vector<double> softmax(std::span<const double> z);

/// Min-max rescale to [0,1]; a constant map becomes all zeros.
SaliencyMap normalize_map(const SaliencyMap& m);

/// Per-sample arithmetic mean over passes (running mean, so identical slices
/// reproduce exactly).
ProbabilityMatrix mean_probability(const PassStack& stack);

}  // namespace uqxai
