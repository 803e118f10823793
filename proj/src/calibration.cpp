#include "uqxai/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "uqxai/kernels.hpp"

namespace uqxai {

namespace {

void require_positive(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be positive and finite, got " +
                          std::to_string(temperature));
  }
}

void require_shapes(const LogitsMatrix& z, const LabelVector& y) {
  if (z.samples() != y.size()) {
    throw ValidationError("logits have " + std::to_string(z.samples()) + " rows but " +
                          std::to_string(y.size()) + " labels");
  }
  if (z.classes() != y.classes()) {
    throw ValidationError("logits have K = " + std::to_string(z.classes()) +
                          " but labels declare K = " + std::to_string(y.classes()));
  }
}

double nll_unchecked(const LogitsMatrix& z, const LabelVector& y, double temperature) {
  std::vector<double> terms(z.samples());
  kernels::nll_terms(z.matrix().data, y.values(), z.classes(), 1.0 / temperature, terms);
  return kernels::ordered_sum(terms) / static_cast<double>(terms.size());
}

}  // namespace

double nll(const LogitsMatrix& z, const LabelVector& y, double temperature) {
  require_positive(temperature);
  require_shapes(z, y);
  return nll_unchecked(z, y, temperature);
}

std::vector<double> temperature_grid() {
  std::vector<double> grid(kTemperatureGridPoints);
  const double lo = std::log(kMinTemperature);
  const double hi = std::log(kMaxTemperature);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    grid[i] = std::exp(lo + f * (hi - lo));
  }
  grid.front() = kMinTemperature;
  grid.back() = kMaxTemperature;
  return grid;
}

TemperatureFit fit_temperature(const LogitsMatrix& z, const LabelVector& y) {
  require_shapes(z, y);
  if (z.samples() < kMinCalibrationSamples) {
    throw ValidationError("temperature fit needs at least " +
                          std::to_string(kMinCalibrationSamples) + " samples, got " +
                          std::to_string(z.samples()));
  }
  const std::set<int> distinct(y.values().begin(), y.values().end());
  if (distinct.size() < 2) {
    throw ValidationError("temperature fit needs at least 2 distinct labels");
  }

  TemperatureFit fit;
  if (z.samples() < kWarnCalibrationSamples) {
    fit.warnings.push_back("calibration set has only " + std::to_string(z.samples()) +
                           " samples; fitted temperature is unreliable");
  }

  auto eval = [&](double t) {
    const double v = nll_unchecked(z, y, t);
    fit.search_trace.emplace_back(t, v);
    return v;
  };

  fit.nll_before = eval(1.0);

  const std::vector<double> grid = temperature_grid();
  std::vector<double> grid_nll(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid_nll[i] = eval(grid[i]);
  const std::size_t best =
      static_cast<std::size_t>(std::min_element(grid_nll.begin(), grid_nll.end()) - grid_nll.begin());

  // Golden section on log T over the neighbours of the grid minimum.
  double a = std::log(grid[best == 0 ? 0 : best - 1]);
  double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(std::exp(c));
  double fd = eval(std::exp(d));
  while (b - a > kLogTemperatureTolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(std::exp(d));
    }
  }
  const double golden_t = std::exp(0.5 * (a + b));
  const double golden_nll = eval(golden_t);

  fit.temperature = golden_t;
  fit.nll_after = golden_nll;
  if (grid_nll[best] < fit.nll_after) {
    fit.temperature = grid[best];
    fit.nll_after = grid_nll[best];
  }
  if (fit.nll_before < fit.nll_after) {
    fit.temperature = 1.0;
    fit.nll_after = fit.nll_before;
  }
  return fit;
}

ProbabilityMatrix apply_temperature(const LogitsMatrix& z, double temperature) {
  require_positive(temperature);
  Matrix out(z.samples(), z.classes());
  kernels::softmax_rows(z.matrix().data, z.classes(), 1.0 / temperature, out.data);
  return ProbabilityMatrix::wrap(std::move(out));
}

}  // namespace uqxai
