// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "tsa/data_io.hpp"
#include "tsa/rng.hpp"

namespace tsa {


struct Segment {
  Index start = 0; ///< first frame
  Index end = 0;   ///< one past the last frame
  int label = 0;

  bool operator==(const Segment &) const = default;
};

/// Per-frame cluster labels in [0, K).
struct Segmentation {
  std::vector<int> labels;
  int K = 0;

  /// Maximal runs of equal labels; they tile [0, N).
  std::vector<Segment> segments() const;
};

/// Relabel so ids appear in first-occurrence order; K is kept if larger.
Segmentation canonicalize(std::vector<int> labels, int K = 0);

struct KMeansOptions {
  int max_iter = 300;
  int restarts = 10;
};

struct KMeansResult {
  Segmentation segmentation;
  Matrix centers;         ///< k x n
  double wcss = 0.0;      ///< within-cluster sum of squares
  bool empty_cluster = false;
};

/// Lloyd iterations from k-means++ seeds; best restart by WCSS.
KMeansResult kmeans(const Matrix &points, int k, Rng &rng, const KMeansOptions &options = {});

/// First-integer-neighbour hierarchy under the cosine metric. Level 0 is the
/// first graph pass over frames; cluster counts strictly decrease.
std::vector<Segmentation> finch_levels(const Matrix &points);

/// FINCH partition with exactly `k` clusters: the coarsest level that still
/// has >= k clusters, then repeated merges of the closest pair of cluster means.
Segmentation finch(const Matrix &points, int k);

struct EigenDecomposition {
  Vector values;  ///< ascending
  Matrix vectors; ///< column j pairs with values(j)
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on a dense symmetric matrix until the
/// off-diagonal Frobenius norm drops below `tolerance`.
EigenDecomposition jacobi_eigen(Matrix symmetric, double tolerance = 1e-10, int max_sweeps = 100);

struct SpectralResult {
  Segmentation segmentation;
  Matrix embedding; ///< N x k, unit rows
};

/// Normalized spectral clustering of a precomputed symmetric affinity.
SpectralResult spectral_from_affinity(const Matrix &affinity, int k, Rng &rng);

/// Gaussian affinity (bandwidth = median pairwise distance), then
/// spectral_from_affinity.
SpectralResult spectral(const Matrix &points, int k, Rng &rng);

/// k contiguous runs, longer runs first when N % k != 0.
Segmentation equal_split(Index frames, int k);

} // namespace tsa
