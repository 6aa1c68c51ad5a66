// SPDX-License-Identifier: Apache-2.0
#include "tsa/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "tsa/error.hpp"

namespace tsa {

namespace {

void require_k(int k, Index frames, int min_k = 1) {
  if (k < min_k || k > frames)
    throw Error(ErrorCode::InvalidArgument, "cluster count k=" + std::to_string(k) +
                                                " must lie in [" + std::to_string(min_k) +
                                                ", N=" + std::to_string(frames) + "]");
}

Segmentation singletons(Index frames) {
  std::vector<int> labels(static_cast<std::size_t>(frames));
  std::iota(labels.begin(), labels.end(), 0);
  return {std::move(labels), static_cast<int>(frames)};
}

struct DisjointSet {
  std::vector<Index> parent;
  explicit DisjointSet(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
};

Matrix unit_rows(const Matrix &points) {
  Matrix unit = points;
  for (Index i = 0; i < unit.rows(); ++i) {
    const double norm = unit.row(i).norm();
    if (!(norm > 0.0))
      throw Error(ErrorCode::ZeroNormRow,
                  "row " + std::to_string(i) + " has zero norm; cosine metric undefined");
    unit.row(i) /= norm;
  }
  return unit;
}

/// Mean of the original points in each cluster.
Matrix cluster_means(const Matrix &points, const std::vector<int> &labels, int clusters) {
  Matrix means = Matrix::Zero(clusters, points.cols());
  std::vector<Index> counts(static_cast<std::size_t>(clusters), 0);
  for (Index i = 0; i < points.rows(); ++i) {
    means.row(labels[i]) += points.row(i);
    ++counts[labels[i]];
  }
  for (int c = 0; c < clusters; ++c)
    means.row(c) /= static_cast<double>(counts[c]);
  return means;
}

/// Connected components of the first-neighbour graph, labelled by first appearance.
std::vector<int> first_neighbour_components(const Matrix &points) {
  const Index n = points.rows();
  const Matrix unit = unit_rows(points);
  const Matrix sim = unit * unit.transpose();
  DisjointSet sets(n);
  for (Index i = 0; i < n; ++i) {
    Index nn = -1;
    for (Index j = 0; j < n; ++j)
      if (j != i && (nn < 0 || sim(i, j) > sim(i, nn)))
        nn = j;
    // Linking i to nn(i) also joins every pair that shares a first neighbour.
    sets.unite(i, nn);
  }
  std::vector<Index> roots(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    roots[i] = sets.find(i);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    labels[i] = static_cast<int>(roots[i]);
  return canonicalize(std::move(labels)).labels;
}

double squared_distance(const Matrix &a, Index i, const Matrix &b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

std::vector<int> assign(const Matrix &points, const Matrix &centers, double &wcss) {
  std::vector<int> labels(static_cast<std::size_t>(points.rows()));
  wcss = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = squared_distance(points, i, centers, 0);
    for (Index c = 1; c < centers.rows(); ++c) {
      const double d = squared_distance(points, i, centers, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    wcss += best_d;
  }
  return labels;
}

Matrix seed_plus_plus(const Matrix &points, int k, Rng &rng) {
  const Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Index>(rng.index(n)));
  Vector d2(n);
  for (Index i = 0; i < n; ++i)
    d2(i) = squared_distance(points, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = n - 1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (Index i = 0; i < n; ++i) {
        u -= d2(i);
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.index(n));
    }
    centers.row(c) = points.row(pick);
    for (Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), squared_distance(points, i, centers, c));
  }
  return centers;
}

KMeansResult lloyd(const Matrix &points, Matrix centers, int max_iter) {
  const int k = static_cast<int>(centers.rows());
  double wcss = 0.0;
  auto labels = assign(points, centers, wcss);
  bool empty = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < points.rows(); ++i) {
      sums.row(labels[i]) += points.row(i);
      ++counts[labels[i]];
    }
    empty = false;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0)
        centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
      else
        empty = true; // centre stays put
    }
    double next_wcss = 0.0;
    auto next = assign(points, centers, next_wcss);
    if (next_wcss > wcss * (1.0 + 1e-12) + 1e-12)
      throw Error(ErrorCode::Internal, "k-means WCSS increased across a Lloyd iteration");
    const bool settled = next == labels;
    labels = std::move(next);
    wcss = next_wcss;
    if (settled)
      break;
  }
  KMeansResult out;
  out.segmentation = canonicalize(labels, k);
  // Keep centres aligned with the canonical labels.
  std::vector<int> order(static_cast<std::size_t>(k), -1);
  for (std::size_t i = 0; i < labels.size(); ++i)
    order[out.segmentation.labels[i]] = labels[i];
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (int c = 0; c < k; ++c)
    if (order[c] >= 0)
      used[order[c]] = true;
  int spare = 0;
  for (int c = 0; c < k; ++c)
    if (order[c] < 0) {
      while (used[spare])
        ++spare;
      order[c] = spare;
      used[spare] = true;
    }
  out.centers.resize(k, points.cols());
  for (int c = 0; c < k; ++c)
    out.centers.row(c) = centers.row(order[c]);
  out.wcss = wcss;
  const int populated =
      *std::max_element(out.segmentation.labels.begin(), out.segmentation.labels.end()) + 1;
  out.empty_cluster = empty || populated < k;
  return out;
}

} // namespace

std::vector<Segment> Segmentation::segments() const {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (out.empty() || out.back().label != labels[i])
      out.push_back({static_cast<Index>(i), static_cast<Index>(i) + 1, labels[i]});
    else
      out.back().end = static_cast<Index>(i) + 1;
  }
  return out;
}

Segmentation canonicalize(std::vector<int> labels, int K) {
  std::unordered_map<int, int> seen;
  for (auto &label : labels) {
    const auto [it, inserted] = seen.try_emplace(label, static_cast<int>(seen.size()));
    label = it->second;
  }
  return {std::move(labels), std::max(K, static_cast<int>(seen.size()))};
}

KMeansResult kmeans(const Matrix &points, int k, Rng &rng, const KMeansOptions &options) {
  require_k(k, points.rows());
  if (options.restarts < 1 || options.max_iter < 1)
    throw Error(ErrorCode::InvalidArgument, "k-means needs restarts >= 1 and max_iter >= 1");
  std::optional<KMeansResult> best;
  for (int r = 0; r < options.restarts; ++r) {
    auto result = lloyd(points, seed_plus_plus(points, k, rng), options.max_iter);
    if (!best || result.wcss < best->wcss)
      best = std::move(result);
  }
  return std::move(*best);
}

std::vector<Segmentation> finch_levels(const Matrix &points) {
  if (points.rows() < 2)
    throw Error(ErrorCode::InvalidArgument, "FINCH needs at least 2 frames");
  std::vector<Segmentation> levels;
  std::vector<int> frame_labels = first_neighbour_components(points);
  int clusters = *std::max_element(frame_labels.begin(), frame_labels.end()) + 1;
  levels.push_back({frame_labels, clusters});
  while (clusters > 1) {
    const Matrix means = cluster_means(points, frame_labels, clusters);
    const auto merged = first_neighbour_components(means);
    const int next = *std::max_element(merged.begin(), merged.end()) + 1;
    if (next >= clusters)
      break;
    for (auto &label : frame_labels)
      label = merged[label];
    auto level = canonicalize(frame_labels);
    frame_labels = level.labels;
    clusters = next;
    levels.push_back(std::move(level));
  }
  return levels;
}

Segmentation finch(const Matrix &points, int k) {
  require_k(k, points.rows());
  if (k == points.rows())
    return singletons(points.rows());
  const auto levels = finch_levels(points);
  Segmentation start = singletons(points.rows());
  for (const auto &level : levels)
    if (level.K >= k)
      start = level;

  std::vector<int> labels = start.labels;
  int clusters = start.K;
  while (clusters > k) {
    const Matrix unit = unit_rows(cluster_means(points, labels, clusters));
    const Matrix sim = unit * unit.transpose();
    int a = 0, b = 1;
    for (int i = 0; i < clusters; ++i)
      for (int j = i + 1; j < clusters; ++j)
        if (sim(i, j) > sim(a, b)) {
          a = i;
          b = j;
        }
    for (auto &label : labels) {
      if (label == b)
        label = a;
      else if (label > b)
        --label;
    }
    --clusters;
  }
  return canonicalize(std::move(labels));
}

EigenDecomposition jacobi_eigen(Matrix a, double tolerance, int max_sweeps) {
  const Index n = a.rows();
  if (n != a.cols())
    throw Error(ErrorCode::DimensionMismatch, "Jacobi needs a square matrix");
  EigenDecomposition out;
  Matrix v = Matrix::Identity(n, n);
  auto off_norm = [&] {
    double s = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j)
          s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  while (off_norm() >= tolerance) {
    if (out.sweeps == max_sweeps)
      throw Error(ErrorCode::Internal, "Jacobi did not converge in " +
                                           std::to_string(max_sweeps) + " sweeps");
    ++out.sweeps;
    for (Index p = 0; p < n - 1; ++p)
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0)
          continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0)
          t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == q)
            continue;
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) < a(y, y); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    out.values(j) = a(order[j], order[j]);
    out.vectors.col(j) = v.col(order[j]);
  }
  return out;
}

SpectralResult spectral_from_affinity(const Matrix &affinity, int k, Rng &rng) {
  const Index n = affinity.rows();
  if (affinity.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "affinity must be square");
  require_k(k, n, 2);
  if (k == n)
    return {singletons(n), Matrix::Identity(n, n)};

  // Off-diagonal smoothing keeps every degree positive.
  constexpr double kAffinityFloor = 1e-10;
  Matrix A = affinity.array() + kAffinityFloor;
  A.diagonal().setZero();
  const Vector inv_sqrt_degree = A.rowwise().sum().cwiseSqrt().cwiseInverse();
  Matrix laplacian = -(inv_sqrt_degree.asDiagonal() * A * inv_sqrt_degree.asDiagonal());
  laplacian.diagonal().array() += 1.0;
  laplacian = 0.5 * (laplacian + laplacian.transpose());

  const auto eig = jacobi_eigen(std::move(laplacian));
  Matrix embedding = eig.vectors.leftCols(k);
  for (Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0)
      embedding.row(i) /= norm;
  }
  auto km = kmeans(embedding, k, rng);
  return {std::move(km.segmentation), std::move(embedding)};
}

SpectralResult spectral(const Matrix &points, int k, Rng &rng) {
  const Index n = points.rows();
  require_k(k, n, 2);
  if (k == n)
    return {singletons(n), Matrix::Identity(n, n)};
  Matrix d2(n, n);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      d2(i, j) = d2(j, i) = squared_distance(points, i, points, j);
      dists.push_back(std::sqrt(d2(i, j)));
    }
  }
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double sigma = *mid;
  if (!(sigma > 0.0))
    sigma = 1.0;
  const Matrix affinity = (-d2.array() / (2.0 * sigma * sigma)).exp();
  return spectral_from_affinity(affinity, k, rng);
}

Segmentation equal_split(Index frames, int k) {
  require_k(k, frames);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(frames));
  const Index base = frames / k, extra = frames % k;
  for (int c = 0; c < k; ++c) {
    const Index length = base + (c < extra ? 1 : 0);
    labels.insert(labels.end(), static_cast<std::size_t>(length), c);
  }
  return {std::move(labels), k};
}

} // namespace tsa
