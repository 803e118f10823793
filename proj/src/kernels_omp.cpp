#include "uqxai/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace uqxai::kernels {

namespace {

using Index = std::int64_t;

inline void softmax_one(const double* z, std::size_t k, double inv_t, double* out) {
  double peak = z[0] * inv_t;
  for (std::size_t j = 1; j < k; ++j) peak = std::max(peak, z[j] * inv_t);
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = std::exp(z[j] * inv_t - peak);
    sum += out[j];
  }
  for (std::size_t j = 0; j < k; ++j) out[j] /= sum;
}

inline double entropy_one(const double* p, std::size_t k) {
  double h = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (p[j] > 0.0) h -= p[j] * std::log(p[j]);
  }
  return h;
}

}  // namespace

void softmax_rows(std::span<const double> in, std::size_t k, double inv_temperature,
                  std::span<double> out) {
  const Index rows = static_cast<Index>(in.size() / k);
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < rows; ++n) {
    softmax_one(in.data() + n * k, k, inv_temperature, out.data() + n * k);
  }
}

void nll_terms(std::span<const double> logits, std::span<const int> labels, std::size_t k,
               double inv_temperature, std::span<double> out) {
  const Index rows = static_cast<Index>(labels.size());
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < rows; ++n) {
    const double* z = logits.data() + n * k;
    double peak = z[0] * inv_temperature;
    for (std::size_t j = 1; j < k; ++j) peak = std::max(peak, z[j] * inv_temperature);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(z[j] * inv_temperature - peak);
    out[n] = std::log(sum) + peak - z[labels[n]] * inv_temperature;
  }
}

void mean_over_passes(std::span<const double> probs, std::size_t t, std::size_t n,
                      std::size_t k, std::span<double> out) {
  const Index rows = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i) {
    double* m = out.data() + i * k;
    const double* first = probs.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) m[j] = first[j];
    for (std::size_t s = 1; s < t; ++s) {
      const double* p = probs.data() + (s * n + i) * k;
      const double inv = 1.0 / static_cast<double>(s + 1);
      for (std::size_t j = 0; j < k; ++j) m[j] += (p[j] - m[j]) * inv;
    }
  }
}

void row_entropy(std::span<const double> probs, std::size_t k, std::span<double> out) {
  const Index rows = static_cast<Index>(out.size());
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < rows; ++n) out[n] = entropy_one(probs.data() + n * k, k);
}

void mean_pass_entropy(std::span<const double> probs, std::size_t t, std::size_t n,
                       std::size_t k, std::span<double> out) {
  const Index rows = static_cast<Index>(n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i) {
    double m = entropy_one(probs.data() + i * k, k);
    for (std::size_t s = 1; s < t; ++s) {
      const double h = entropy_one(probs.data() + (s * n + i) * k, k);
      m += (h - m) / static_cast<double>(s + 1);
    }
    out[i] = m;
  }
}

void pixel_mean_variance(std::span<const double> maps, std::size_t d, std::size_t pixels,
                         std::span<double> mean, std::span<double> variance) {
  const Index count = static_cast<Index>(pixels);
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < count; ++p) {
    double sum = 0.0;
    for (std::size_t s = 0; s < d; ++s) sum += maps[s * pixels + p];
    const double mu = sum / static_cast<double>(d);
    double ss = 0.0;
    for (std::size_t s = 0; s < d; ++s) {
      const double dev = maps[s * pixels + p] - mu;
      ss += dev * dev;
    }
    mean[p] = mu;
    variance[p] = d > 1 ? ss / static_cast<double>(d - 1) : 0.0;
  }
}

double ordered_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace uqxai::kernels
