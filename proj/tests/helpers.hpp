// SPDX-License-Identifier: Apache-2.0
// Independent oracles and fixtures shared by the test binaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tsa/data_io.hpp"
#include "tsa/rng.hpp"

namespace tsa::test {

inline Matrix random_matrix(Index rows, Index cols, Rng &rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      m(i, j) = rng.uniform(lo, hi);
  return m;
}

/// Row-stochastic matrix with strictly positive entries.
inline Matrix random_pdf_rows(Index n, Rng &rng) {
  Matrix m = random_matrix(n, n, rng, 0.05, 1.0);
  for (Index i = 0; i < n; ++i)
    m.row(i) /= m.row(i).sum();
  return m;
}

/// Scratch directory, wiped on construction.
inline std::filesystem::path scratch_dir(const std::string &name) {
  const char *root = std::getenv("TSA_TEST_TMP");
  auto dir = std::filesystem::path(root ? root : std::filesystem::temp_directory_path().string()) /
             name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Adjusted Rand index from the pair-counting definition.
inline double adjusted_rand_index(const std::vector<int> &a, const std::vector<int> &b) {
  std::map<std::pair<int, int>, double> cell;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cell[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double idx = 0, sa = 0, sb = 0;
  for (const auto &[k, v] : cell)
    idx += c2(v);
  for (const auto &[k, v] : ra)
    sa += c2(v);
  for (const auto &[k, v] : rb)
    sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = (sa + sb) / 2;
  if (max_index == expected)
    return 1.0;
  return (idx - expected) / (max_index - expected);
}

/// Maximum assignment value over all injections of the smaller side.
inline std::int64_t brute_force_assignment(const std::vector<std::vector<std::int64_t>> &w) {
  const std::size_t rows = w.size(), cols = w.empty() ? 0 : w[0].size();
  const bool transpose = rows > cols;
  const std::size_t small = transpose ? cols : rows, big = transpose ? rows : cols;
  std::vector<std::size_t> perm(big);
  std::iota(perm.begin(), perm.end(), 0);
  std::int64_t best = 0;
  do {
    std::int64_t total = 0;
    for (std::size_t s = 0; s < small; ++s)
      total += transpose ? w[perm[s]][s] : w[s][perm[s]];
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Planted blobs: `sizes[c]` points around centre c * spacing on axis c.
inline Matrix planted_blobs(const std::vector<int> &sizes, Index dims, double spacing,
                            double sigma, Rng &rng, std::vector<int> *truth = nullptr) {
  const Index total = std::accumulate(sizes.begin(), sizes.end(), Index{0});
  Matrix m = Matrix::Zero(total, dims);
  Index r = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c)
    for (int k = 0; k < sizes[c]; ++k, ++r) {
      for (Index j = 0; j < dims; ++j)
        m(r, j) = sigma * rng.normal();
      m(r, static_cast<Index>(c) % dims) += spacing;
      if (truth)
        truth->push_back(static_cast<int>(c));
    }
  return m;
}

/// Two star-shaped blobs around orthogonal unit centres e0 and e1. Satellites
/// sit at radius `r` along mutually orthogonal axes, so every satellite's first
/// neighbour (cosine or Euclidean) is its own centre.
inline Matrix star_blobs(int satellites, Index dims, double r, std::vector<int> *truth = nullptr) {
  Matrix m = Matrix::Zero(2 * (satellites + 1), dims);
  Index row = 0;
  for (int blob = 0; blob < 2; ++blob) {
    m(row++, blob) = 1.0;
    for (int s = 0; s < satellites; ++s, ++row) {
      m(row, blob) = 1.0;
      const Index axis = 2 + s / 2;
      m(row, axis) = (s % 2 == 0 ? r : -r);
    }
    if (truth)
      truth->insert(truth->end(), static_cast<std::size_t>(satellites + 1), blob);
  }
  return m;
}

} // namespace tsa::test
