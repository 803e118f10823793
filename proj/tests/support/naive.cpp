#include "naive.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace naive {

std::vector<double> softmax(const std::vector<double>& z, double temperature) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : z) m = std::max(m, v / temperature);
  std::vector<double> e(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = std::exp(z[i] / temperature - m);
    s += e[i];
  }
  for (double& v : e) v /= s;
  return e;
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

Ece ece(const Rows& p, const std::vector<int>& y, std::size_t bins) {
  const std::size_t n = p.size();
  std::vector<double> conf(n);
  std::vector<int> pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < p[i].size(); ++k) {
      if (p[i][k] > p[i][best]) best = k;
    }
    pred[i] = static_cast<int>(best);
    conf[i] = p[i][best];
  }
  std::vector<std::size_t> which(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double lo = static_cast<double>(b) / static_cast<double>(bins);
      const double hi = static_cast<double>(b + 1) / static_cast<double>(bins);
      const bool last = b + 1 == bins;
      if (conf[i] >= lo && (conf[i] < hi || last)) {
        which[i] = b;
        break;
      }
    }
  }
  Ece r;
  r.count.assign(bins, 0);
  r.mean_confidence.assign(bins, std::nan(""));
  r.accuracy.assign(bins, std::nan(""));
  for (std::size_t b = 0; b < bins; ++b) {
    double cs = 0.0;
    double as = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (which[i] != b) continue;
      ++c;
      cs += conf[i];
      as += pred[i] == y[i] ? 1.0 : 0.0;
    }
    r.count[b] = c;
    if (c == 0) continue;
    r.mean_confidence[b] = cs / static_cast<double>(c);
    r.accuracy[b] = as / static_cast<double>(c);
    r.ece += static_cast<double>(c) / static_cast<double>(n) *
             std::fabs(r.accuracy[b] - r.mean_confidence[b]);
  }
  return r;
}

double brier(const Rows& p, const std::vector<int>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < p[i].size(); ++k) {
      const double t = static_cast<int>(k) == y[i] ? 1.0 : 0.0;
      row += (p[i][k] - t) * (p[i][k] - t);
    }
    total += row;
  }
  return total / static_cast<double>(p.size());
}

std::vector<CurvePoint> threshold_sweep(const std::vector<double>& conf,
                                        const std::vector<bool>& correct) {
  std::set<double, std::greater<>> distinct(conf.begin(), conf.end());
  std::vector<CurvePoint> out;
  for (double t : distinct) {
    std::size_t accepted = 0;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < conf.size(); ++i) {
      if (conf[i] >= t) {
        ++accepted;
        if (!correct[i]) ++errors;
      }
    }
    out.push_back({static_cast<double>(accepted) / static_cast<double>(conf.size()),
                   static_cast<double>(errors) / static_cast<double>(accepted), t});
  }
  return out;
}

double aurc(const std::vector<double>& conf, const std::vector<bool>& correct) {
  const std::size_t n = conf.size();
  std::vector<bool> used(n, false);
  std::size_t errors = 0;
  double sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      if (best == n || conf[i] > conf[best]) best = i;
    }
    used[best] = true;
    if (!correct[best]) ++errors;
    sum += static_cast<double>(errors) / static_cast<double>(k);
  }
  return sum / static_cast<double>(n);
}

void pixel_mean_variance(const Rows& maps, std::vector<double>& mean, std::vector<double>& var) {
  const std::size_t d = maps.size();
  const std::size_t px = maps.front().size();
  mean.assign(px, 0.0);
  var.assign(px, 0.0);
  for (std::size_t j = 0; j < px; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += maps[i][j];
    mean[j] = s / static_cast<double>(d);
    if (d < 2) continue;
    double ss = 0.0;
    for (std::size_t i = 0; i < d; ++i) ss += (maps[i][j] - mean[j]) * (maps[i][j] - mean[j]);
    var[j] = ss / static_cast<double>(d - 1);
  }
}

std::vector<double> solve(Rows a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    if (std::fabs(a[piv][col]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

std::vector<double> weighted_ridge(const Rows& x, const std::vector<double>& y,
                                   const std::vector<double>& w, double lambda) {
  const std::size_t d = x.front().size() + 1;
  Rows a(d, std::vector<double>(d, 0.0));
  std::vector<double> b(d, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> row(d);
    row[0] = 1.0;
    for (std::size_t j = 1; j < d; ++j) row[j] = x[i][j - 1];
    for (std::size_t r = 0; r < d; ++r) {
      b[r] += w[i] * row[r] * y[i];
      for (std::size_t c = 0; c < d; ++c) a[r][c] += w[i] * row[r] * row[c];
    }
  }
  for (std::size_t j = 1; j < d; ++j) a[j][j] += lambda;
  return solve(a, b);
}

double nll(const Rows& logits, const std::vector<int>& y, double temperature) {
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : logits[i]) m = std::max(m, v / temperature);
    double z = 0.0;
    for (double v : logits[i]) z += std::exp(v / temperature - m);
    s += -(logits[i][static_cast<std::size_t>(y[i])] / temperature - m - std::log(z));
  }
  return s / static_cast<double>(logits.size());
}

std::pair<double, double> temperature_scan(const Rows& logits, const std::vector<int>& y) {
  std::pair<double, double> best{0.0, std::numeric_limits<double>::infinity()};
  for (int step = 5; step <= 2000; ++step) {
    const double t = step / 100.0;
    const double v = nll(logits, y, t);
    if (v < best.second) best = {t, v};
  }
  return best;
}

Rows random_simplex(std::mt19937_64& g, std::size_t n, std::size_t k, double sharpness) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Rows out(n, std::vector<double>(k));
  for (auto& row : out) {
    double s = 0.0;
    for (double& v : row) {
      v = std::exp(sharpness * nd(g));
      s += v;
    }
    for (double& v : row) v /= s;
  }
  return out;
}

std::vector<int> random_labels(std::mt19937_64& g, std::size_t n, std::size_t k) {
  std::uniform_int_distribution<int> ud(0, static_cast<int>(k) - 1);
  std::vector<int> y(n);
  for (int& v : y) v = ud(g);
  return y;
}

}  // namespace naive
