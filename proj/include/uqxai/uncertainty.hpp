#pragma once

#include <span>
#include <vector>

#include "uqxai/core.hpp"

namespace uqxai {

/// Per-sample scalar uncertainty signals derived from a pass stack.
/// Entropy and mutual information are in nats.
struct UncertaintyScores {
  std::vector<double> entropy;
  std::vector<double> mutual_information;
  std::vector<double> disagreement;
  std::vector<double> normalized;  // entropy / ln K
};

/// Dirichlet concentrations mapped to subjective-logic masses:
/// S = sum alpha, belief_k = (alpha_k - 1) / S, u_mass = K / S.
struct EvidentialOutput {
  Matrix alpha;
  ProbabilityMatrix expected_p;
  Matrix belief;
  std::vector<double> u_mass;
};

double predictive_entropy(std::span<const double> p);

/// H(mean_t p_t) - mean_t H(p_t). Values within 1e-9 below zero are clamped.
std::vector<double> mutual_information(const PassStack& stack);

/// 1 - (plurality count of per-pass argmaxes) / T.
std::vector<double> disagreement(const PassStack& stack);

EvidentialOutput evidential_map(const Matrix& alpha);

/// H / ln K, for entropies in [0, ln K].
std::vector<double> normalize_uncertainty(std::span<const double> entropy, std::size_t num_classes);

enum class UncertaintySource { kEntropy, kEvidentialMass };

/// All scores for a stack; `normalized` is always the entropy-based ũ.
UncertaintyScores uncertainty_scores(const PassStack& stack);

}  // namespace uqxai
