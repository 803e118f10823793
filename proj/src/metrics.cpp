#include "uqxai/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "uqxai/log.hpp"

namespace uqxai {

namespace {

void require_shapes(const ProbabilityMatrix& p, const LabelVector& y) {
  if (p.samples() != y.size()) {
    throw ValidationError("probabilities have " + std::to_string(p.samples()) + " rows but " +
                          std::to_string(y.size()) + " labels");
  }
  if (p.classes() != y.classes()) {
    throw ValidationError("probabilities have K = " + std::to_string(p.classes()) +
                          " but labels declare K = " + std::to_string(y.classes()));
  }
}

std::size_t bin_index(const std::vector<double>& edges, double c) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), c);
  const auto b = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - edges.begin() - 1, 0));
  return std::min(b, edges.size() - 2);
}

}  // namespace

std::vector<double> confidences(const ProbabilityMatrix& p) {
  std::vector<double> c(p.samples());
  for (std::size_t n = 0; n < p.samples(); ++n) {
    auto r = p.row(n);
    c[n] = *std::max_element(r.begin(), r.end());
  }
  return c;
}

std::vector<int> predictions(const ProbabilityMatrix& p) {
  std::vector<int> out(p.samples());
  for (std::size_t n = 0; n < p.samples(); ++n) out[n] = static_cast<int>(argmax(p.row(n)));
  return out;
}

EceResult ece(const ProbabilityMatrix& p, const LabelVector& y, std::size_t bins) {
  require_shapes(p, y);
  if (bins < 1) throw ValidationError("ECE needs at least one bin");

  EceResult r;
  auto& rb = r.bins;
  rb.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    rb.edges[b] = static_cast<double>(b) / static_cast<double>(bins);
  }
  rb.count.assign(bins, 0);
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<double> correct_sum(bins, 0.0);

  const std::vector<double> conf = confidences(p);
  const std::vector<int> pred = predictions(p);
  for (std::size_t n = 0; n < p.samples(); ++n) {
    const std::size_t b = bin_index(rb.edges, conf[n]);
    ++rb.count[b];
    conf_sum[b] += conf[n];
    if (pred[n] == y[n]) correct_sum[b] += 1.0;
  }

  rb.mean_confidence.resize(bins);
  rb.accuracy.resize(bins);
  const double total = static_cast<double>(p.samples());
  for (std::size_t b = 0; b < bins; ++b) {
    if (rb.count[b] == 0) continue;
    const double nb = static_cast<double>(rb.count[b]);
    rb.mean_confidence[b] = conf_sum[b] / nb;
    rb.accuracy[b] = correct_sum[b] / nb;
    r.ece += (nb / total) * std::abs(*rb.accuracy[b] - *rb.mean_confidence[b]);
  }
  return r;
}

double brier(const ProbabilityMatrix& p, const LabelVector& y) {
  require_shapes(p, y);
  double total = 0.0;
  for (std::size_t n = 0; n < p.samples(); ++n) {
    auto r = p.row(n);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double target = static_cast<int>(k) == y[n] ? 1.0 : 0.0;
      s += (r[k] - target) * (r[k] - target);
    }
    total += s;
  }
  return total / static_cast<double>(p.samples());
}

ClassificationReport classification_report(const ProbabilityMatrix& p, const LabelVector& y) {
  require_shapes(p, y);
  const std::size_t k = p.classes();
  const std::size_t n = p.samples();

  ClassificationReport rep;
  rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
  const std::vector<int> pred = predictions(p);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ++rep.confusion[y[i]][pred[i]];
    if (pred[i] == y[i]) ++correct;
  }
  rep.top1_accuracy = static_cast<double>(correct) / static_cast<double>(n);

  rep.support.assign(k, 0);
  rep.per_class_f1.assign(k, 0.0);
  rep.per_class_sensitivity.assign(k, std::nullopt);
  rep.per_class_specificity.assign(k, std::nullopt);
  double f1_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t tp = rep.confusion[c][c];
    std::size_t row = 0;
    std::size_t col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += rep.confusion[c][j];
      col += rep.confusion[j][c];
    }
    const std::size_t fn = row - tp;
    const std::size_t fp = col - tp;
    const std::size_t tn = n - row - fp;
    rep.support[c] = row;

    const std::size_t f1_den = 2 * tp + fp + fn;
    rep.per_class_f1[c] = f1_den == 0 ? 0.0 : 2.0 * tp / static_cast<double>(f1_den);
    if (row > 0) {
      rep.per_class_sensitivity[c] = static_cast<double>(tp) / static_cast<double>(row);
      f1_sum += rep.per_class_f1[c];
      ++present;
    } else {
      rep.warnings.push_back("class " + std::to_string(c) +
                             " absent from labels; excluded from macro F1");
    }
    if (tn + fp > 0) {
      rep.per_class_specificity[c] = static_cast<double>(tn) / static_cast<double>(tn + fp);
    }
  }
  rep.macro_f1 = present == 0 ? 0.0 : f1_sum / static_cast<double>(present);
  for (const auto& w : rep.warnings) log_warning(w);
  return rep;
}

StratifiedReport stratified_report(const ProbabilityMatrix& p, const LabelVector& y,
                                   const std::vector<std::string>& groups, std::size_t bins) {
  require_shapes(p, y);
  if (groups.size() != p.samples()) {
    throw ValidationError("group keys have " + std::to_string(groups.size()) +
                          " entries but there are " + std::to_string(p.samples()) + " samples");
  }
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < groups.size(); ++i) members[groups[i]].push_back(i);

  StratifiedReport out;
  for (const auto& [key, idx] : members) {
    Matrix sub(idx.size(), p.classes());
    std::vector<int> sub_y(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      auto src = p.row(idx[j]);
      std::copy(src.begin(), src.end(), sub.row(j).begin());
      sub_y[j] = y[idx[j]];
    }
    const auto sp = ProbabilityMatrix::wrap(std::move(sub));
    const LabelVector sy(std::move(sub_y), p.classes());
    GroupReport g;
    g.n = idx.size();
    g.low_support = g.n < kLowSupportThreshold;
    g.classification = classification_report(sp, sy);
    g.ece = ece(sp, sy, bins);
    g.brier = brier(sp, sy);
    out.groups.emplace(key, std::move(g));
  }
  return out;
}

}  // namespace uqxai
