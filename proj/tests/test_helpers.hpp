#pragma once

#include "flatm/corpus.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace testing {

// Dense [term][doc] counts as a TermDocMatrix with doc ids "d0", "d1", ...
inline flatm::TermDocMatrix make_matrix(const std::vector<std::vector<double>>& rows) {
  flatm::TermDocMatrix f;
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0)
        t.emplace_back(i, j, rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  f.counts.resize(m, n);
  f.counts.setFromTriplets(t.begin(), t.end());
  for (Eigen::Index j = 0; j < n; ++j) f.doc_ids.push_back("d" + std::to_string(j));
  return f;
}

}  // namespace testing
