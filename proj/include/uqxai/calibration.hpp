#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uqxai/core.hpp"

namespace uqxai {

inline constexpr double kMinTemperature = 0.05;
inline constexpr double kMaxTemperature = 20.0;
inline constexpr std::size_t kTemperatureGridPoints = 50;
inline constexpr double kLogTemperatureTolerance = 1e-4;
inline constexpr std::size_t kMinCalibrationSamples = 10;
inline constexpr std::size_t kWarnCalibrationSamples = 100;

struct TemperatureFit {
  double temperature = 1.0;
  double nll_before = 0.0;  // at T = 1
  double nll_after = 0.0;
  std::vector<std::pair<double, double>> search_trace;  // (T, NLL) in evaluation order
  std::vector<std::string> warnings;
};

/// Mean negative log-likelihood of softmax(z / T) at the true labels.
double nll(const LogitsMatrix& z, const LabelVector& y, double temperature);

/// Minimizes NLL over T in [0.05, 20]: a 50-point geometric grid, then
/// golden-section search on log T between the grid minimum's neighbours.
/// T = 1 is always evaluated so the fit never worsens NLL.
TemperatureFit fit_temperature(const LogitsMatrix& z, const LabelVector& y);

/// Row-wise softmax(z / T).
ProbabilityMatrix apply_temperature(const LogitsMatrix& z, double temperature);

/// The geometric presearch grid (exposed for tests).
std::vector<double> temperature_grid();

}  // namespace uqxai
