#pragma once

// Straightforward reference implementations used as test oracles. They trade
// speed for obviousness and share no code with the library.

#include <cstdint>
#include <random>
#include <vector>

namespace naive {

using Rows = std::vector<std::vector<double>>;

std::vector<double> softmax(const std::vector<double>& z, double temperature = 1.0);
double entropy(const std::vector<double>& p);

struct Ece {
  double ece = 0.0;
  std::vector<std::size_t> count;
  std::vector<double> mean_confidence;  // NaN for empty bins
  std::vector<double> accuracy;
};

/// Two-pass ECE: first assign every sample to a bin by comparing against the
/// edges, then average each bin.
Ece ece(const Rows& p, const std::vector<int>& y, std::size_t bins);

double brier(const Rows& p, const std::vector<int>& y);

struct CurvePoint {
  double coverage;
  double risk;
  double threshold;
};

/// Accept-at-threshold sweep: for every distinct confidence value t, accept
/// everything with confidence >= t. One point per distinct value, highest first.
std::vector<CurvePoint> threshold_sweep(const std::vector<double>& conf,
                                        const std::vector<bool>& correct);

/// AURC by selection sort (stable) and prefix risks.
double aurc(const std::vector<double>& conf, const std::vector<bool>& correct);

/// Textbook two-pass mean and (d-1) variance per pixel over d maps.
void pixel_mean_variance(const Rows& maps, std::vector<double>& mean, std::vector<double>& var);

/// Solves A x = b by Gaussian elimination with partial pivoting.
std::vector<double> solve(Rows a, std::vector<double> b);

/// Weighted ridge with an unpenalized intercept: returns (intercept, beta...).
std::vector<double> weighted_ridge(const Rows& x, const std::vector<double>& y,
                                   const std::vector<double>& w, double lambda);

double nll(const Rows& logits, const std::vector<int>& y, double temperature);

/// Exhaustive scan over T = 0.05, 0.06, ..., 20.00; returns (T, NLL) at the minimum.
std::pair<double, double> temperature_scan(const Rows& logits, const std::vector<int>& y);

/// Random simplex rows: Dirichlet-like via normalized exponentials of Gaussians
/// scaled by `sharpness`.
Rows random_simplex(std::mt19937_64& g, std::size_t n, std::size_t k, double sharpness = 2.0);
std::vector<int> random_labels(std::mt19937_64& g, std::size_t n, std::size_t k);

}  // namespace naive
