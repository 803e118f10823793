#include "uqxai/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "uqxai/kernels.hpp"

namespace uqxai {

namespace {

constexpr double kClampSlack = 1e-9;

}  // namespace

double predictive_entropy(std::span<const double> p) {
  validate_simplex_row(p, kSimplexTolerance, 0);
  double h = 0.0;
  kernels::row_entropy(p, p.size(), std::span<double>(&h, 1));
  return std::clamp(h, 0.0, std::log(static_cast<double>(p.size())));
}

std::vector<double> mutual_information(const PassStack& stack) {
  const Tensor3 probs = stack.probabilities();
  const std::size_t n = stack.samples();
  const std::size_t k = stack.classes();

  Matrix mean(n, k);
  kernels::mean_over_passes(probs.data, probs.d0, n, k, mean.data);
  std::vector<double> h_mean(n);
  kernels::row_entropy(mean.data, k, h_mean);
  std::vector<double> mean_h(n);
  kernels::mean_pass_entropy(probs.data, probs.d0, n, k, mean_h);

  std::vector<double> mi(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = h_mean[i] - mean_h[i];
    if (v < 0.0) {
      if (v < -kClampSlack) {
        throw ComputationError("mutual information " + std::to_string(v) + " at sample " +
                               std::to_string(i));
      }
      v = 0.0;
    }
    mi[i] = v;
  }
  return mi;
}

std::vector<double> disagreement(const PassStack& stack) {
  const auto& t = stack.tensor();
  const std::size_t passes = stack.passes();
  const std::size_t n = stack.samples();
  const std::size_t k = stack.classes();
  // Softmax preserves argmax, so logits can be voted on directly.
  std::vector<double> out(n);
  std::vector<std::size_t> votes(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t s = 0; s < passes; ++s) {
      std::span<const double> row(t.data.data() + (s * n + i) * k, k);
      ++votes[argmax(row)];
    }
    const auto plurality = *std::max_element(votes.begin(), votes.end());
    out[i] = 1.0 - static_cast<double>(plurality) / static_cast<double>(passes);
  }
  return out;
}

EvidentialOutput evidential_map(const Matrix& alpha) {
  if (alpha.rows < 1 || alpha.cols < 2) throw ValidationError("alpha needs N >= 1 and K >= 2");
  const std::size_t n = alpha.rows;
  const std::size_t k = alpha.cols;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double a = alpha(i, j);
      if (!std::isfinite(a) || a < 1.0) {
        throw ValidationError("alpha[" + std::to_string(i) + "," + std::to_string(j) +
                              "] = " + std::to_string(a) + " is below 1");
      }
    }
  }

  Matrix expected(n, k);
  Matrix belief(n, k);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    double strength = 0.0;
    for (double a : alpha.row(i)) strength += a;
    for (std::size_t j = 0; j < k; ++j) {
      expected(i, j) = alpha(i, j) / strength;
      belief(i, j) = (alpha(i, j) - 1.0) / strength;
    }
    u[i] = static_cast<double>(k) / strength;
  }
  return EvidentialOutput{alpha, ProbabilityMatrix::wrap(std::move(expected)), std::move(belief),
                          std::move(u)};
}

std::vector<double> normalize_uncertainty(std::span<const double> entropy,
                                          std::size_t num_classes) {
  if (num_classes < 2) throw ValidationError("normalize_uncertainty needs K >= 2");
  const double max_h = std::log(static_cast<double>(num_classes));
  std::vector<double> out(entropy.size());
  for (std::size_t i = 0; i < entropy.size(); ++i) {
    const double h = entropy[i];
    if (!std::isfinite(h) || h < -kClampSlack || h > max_h + kClampSlack) {
      throw ValidationError("entropy " + std::to_string(h) + " at index " + std::to_string(i) +
                            " outside [0, ln K]");
    }
    out[i] = std::clamp(h / max_h, 0.0, 1.0);
  }
  return out;
}

UncertaintyScores uncertainty_scores(const PassStack& stack) {
  UncertaintyScores s;
  const ProbabilityMatrix mean = mean_probability(stack);
  s.entropy.resize(stack.samples());
  kernels::row_entropy(mean.matrix().data, stack.classes(), s.entropy);
  const double max_h = std::log(static_cast<double>(stack.classes()));
  for (double& h : s.entropy) h = std::clamp(h, 0.0, max_h);
  s.mutual_information = mutual_information(stack);
  s.disagreement = disagreement(stack);
  s.normalized = normalize_uncertainty(s.entropy, stack.classes());
  return s;
}

}  // namespace uqxai
