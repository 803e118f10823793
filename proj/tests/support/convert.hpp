#pragma once

#include "naive.hpp"
#include "uqxai/core.hpp"

namespace testing {

inline uqxai::Matrix to_matrix(const naive::Rows& r) {
  uqxai::Matrix m(r.size(), r.empty() ? 0 : r.front().size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = r[i][j];
  }
  return m;
}

inline naive::Rows to_rows(const uqxai::Matrix& m) {
  naive::Rows r(m.rows, std::vector<double>(m.cols));
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) r[i][j] = m(i, j);
  }
  return r;
}

inline uqxai::ProbabilityMatrix to_probs(const naive::Rows& r) {
  return uqxai::ProbabilityMatrix::ingest(to_matrix(r));
}

}  // namespace testing
