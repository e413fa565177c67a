#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ncdlab/features.hpp"

namespace ncdlab::oracle {

// Minimum within-cluster sum of squares over every assignment of the rows to at most k groups.
inline double brute_force_inertia(const RowMatrix& x, int k) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  std::vector<int> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
      int count = 0;
      std::vector<double> mean(d, 0.0);
      for (int i = 0; i < n; ++i)
        if (label[i] == c) {
          ++count;
          for (int j = 0; j < d; ++j) mean[j] += x(i, j);
        }
      if (count == 0) continue;
      for (auto& m : mean) m /= count;
      for (int i = 0; i < n; ++i)
        if (label[i] == c)
          for (int j = 0; j < d; ++j) total += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
    }
    best = std::min(best, total);
    int pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

// Best total weight over every permutation (square matrices only).
inline long brute_force_matching(const std::vector<std::vector<long>>& w) {
  std::vector<int> perm(w.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  long best = std::numeric_limits<long>::min();
  do {
    long s = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += w[i][perm[i]];
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace ncdlab::oracle
