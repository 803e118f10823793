// Single-threaded reference loops. Kept deliberately plain; the parallel
// kernels must reproduce these results exactly.

#include <algorithm>
#include <cmath>

#include "uqxai/kernels.hpp"

namespace uqxai::kernels::serial {

void softmax_rows(std::span<const double> in, std::size_t k, double inv_temperature,
                  std::span<double> out) {
  const std::size_t rows = in.size() / k;
  for (std::size_t n = 0; n < rows; ++n) {
    double peak = in[n * k] * inv_temperature;
    for (std::size_t j = 1; j < k; ++j) peak = std::max(peak, in[n * k + j] * inv_temperature);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[n * k + j] = std::exp(in[n * k + j] * inv_temperature - peak);
      sum += out[n * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) out[n * k + j] /= sum;
  }
}

void nll_terms(std::span<const double> logits, std::span<const int> labels, std::size_t k,
               double inv_temperature, std::span<double> out) {
  for (std::size_t n = 0; n < labels.size(); ++n) {
    double peak = logits[n * k] * inv_temperature;
    for (std::size_t j = 1; j < k; ++j)
      peak = std::max(peak, logits[n * k + j] * inv_temperature);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      sum += std::exp(logits[n * k + j] * inv_temperature - peak);
    out[n] = std::log(sum) + peak - logits[n * k + labels[n]] * inv_temperature;
  }
}

void mean_over_passes(std::span<const double> probs, std::size_t t, std::size_t n,
                      std::size_t k, std::span<double> out) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double m = probs[i * k + j];
      for (std::size_t s = 1; s < t; ++s) {
        m += (probs[(s * n + i) * k + j] - m) * (1.0 / static_cast<double>(s + 1));
      }
      out[i * k + j] = m;
    }
  }
}

void row_entropy(std::span<const double> probs, std::size_t k, std::span<double> out) {
  for (std::size_t n = 0; n < out.size(); ++n) {
    double h = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = probs[n * k + j];
      if (p > 0.0) h -= p * std::log(p);
    }
    out[n] = h;
  }
}

void mean_pass_entropy(std::span<const double> probs, std::size_t t, std::size_t n,
                       std::size_t k, std::span<double> out) {
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (std::size_t s = 0; s < t; ++s) {
      double h = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double p = probs[(s * n + i) * k + j];
        if (p > 0.0) h -= p * std::log(p);
      }
      m = s == 0 ? h : m + (h - m) / static_cast<double>(s + 1);
    }
    out[i] = m;
  }
}

void pixel_mean_variance(std::span<const double> maps, std::size_t d, std::size_t pixels,
                         std::span<double> mean, std::span<double> variance) {
  for (std::size_t p = 0; p < pixels; ++p) {
    double sum = 0.0;
    for (std::size_t s = 0; s < d; ++s) sum += maps[s * pixels + p];
    mean[p] = sum / static_cast<double>(d);
  }
  for (std::size_t p = 0; p < pixels; ++p) {
    double ss = 0.0;
    for (std::size_t s = 0; s < d; ++s) {
      const double dev = maps[s * pixels + p] - mean[p];
      ss += dev * dev;
    }
    variance[p] = d > 1 ? ss / static_cast<double>(d - 1) : 0.0;
  }
}

}  // namespace uqxai::kernels::serial
