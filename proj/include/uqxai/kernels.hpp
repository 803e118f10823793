#pragma once

// Data-parallel row kernels. Every kernel in `uqxai::kernels` is OpenMP
// parallel over its outer axis; `uqxai::kernels::serial` holds plain
// single-threaded loops with the same arithmetic order. The two must agree
// bit-for-bit (tests/test_kernels.cpp) and bench/ compares their speed.
//
// Reductions across the outer axis are never done inside a kernel: kernels
// write per-row values and callers sum them in index order, so results do
// not depend on the thread count.

#include <cstddef>
#include <span>

namespace uqxai::kernels {

/// out[n,:] = softmax(in[n,:] * inv_temperature), rows of length k.
void softmax_rows(std::span<const double> in, std::size_t k, double inv_temperature,
                  std::span<double> out);

/// out[n] = -ln softmax(in[n,:] * inv_temperature)[labels[n]].
void nll_terms(std::span<const double> logits, std::span<const int> labels, std::size_t k,
               double inv_temperature, std::span<double> out);

/// out[n,:] = running mean over t of probs[t,n,:]; probs is t x n x k.
void mean_over_passes(std::span<const double> probs, std::size_t t, std::size_t n,
                      std::size_t k, std::span<double> out);

/// out[n] = -sum_k p ln p (0 ln 0 = 0).
void row_entropy(std::span<const double> probs, std::size_t k, std::span<double> out);

/// out[n] = running mean over t of H(probs[t,n,:]).
void mean_pass_entropy(std::span<const double> probs, std::size_t t, std::size_t n,
                       std::size_t k, std::span<double> out);

/// Per-pixel mean and sample variance (denominator d-1, zero when d == 1)
/// over a d x pixels stack.
void pixel_mean_variance(std::span<const double> maps, std::size_t d, std::size_t pixels,
                         std::span<double> mean, std::span<double> variance);

namespace serial {

void softmax_rows(std::span<const double> in, std::size_t k, double inv_temperature,
                  std::span<double> out);
void nll_terms(std::span<const double> logits, std::span<const int> labels, std::size_t k,
               double inv_temperature, std::span<double> out);
void mean_over_passes(std::span<const double> probs, std::size_t t, std::size_t n,
                      std::size_t k, std::span<double> out);
void row_entropy(std::span<const double> probs, std::size_t k, std::span<double> out);
void mean_pass_entropy(std::span<const double> probs, std::size_t t, std::size_t n,
                       std::size_t k, std::span<double> out);
void pixel_mean_variance(std::span<const double> maps, std::size_t d, std::size_t pixels,
                         std::span<double> mean, std::span<double> variance);

}  // namespace serial

/// In-order sum; the only reduction callers should use over kernel outputs.
double ordered_sum(std::span<const double> v);

}  // namespace uqxai::kernels
