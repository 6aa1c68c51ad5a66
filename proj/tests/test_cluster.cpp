// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <numbers>
#include <set>

#include "helpers.hpp"
#include "tsa/cluster.hpp"
#include "tsa/error.hpp"

using namespace tsa;
using doctest::Approx;

namespace {

/// Eigenvalues of a symmetric 3x3 from the trigonometric root formula of its
/// characteristic cubic, ascending.
std::array<double, 3> cubic_eigenvalues(const Matrix &a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = a.trace() / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Matrix b = (a - q * Matrix::Identity(3, 3)) / p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double e2 = 3.0 * q - e1 - e3;
  std::array<double, 3> out{e1, e2, e3};
  std::sort(out.begin(), out.end());
  return out;
}

void check_tiling(const Segmentation &s) {
  const auto segs = s.segments();
  Index pos = 0;
  std::vector<int> rebuilt;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    CHECK(segs[k].start == pos);
    CHECK(segs[k].end > segs[k].start);
    if (k > 0)
      CHECK(segs[k].label != segs[k - 1].label);
    for (Index i = segs[k].start; i < segs[k].end; ++i)
      rebuilt.push_back(segs[k].label);
    pos = segs[k].end;
  }
  CHECK(rebuilt == s.labels);
}

} // namespace

TEST_CASE("segments tile the frame range") {
  Segmentation s{{0, 0, 1, 1, 1, 0, 2, 2}, 3};
  check_tiling(s);
  CHECK(s.segments().size() == 4);
  CHECK(s.segments()[2] == Segment{5, 6, 0});
}

TEST_CASE("canonicalize relabels by first occurrence") {
  const auto s = canonicalize({5, 5, 2, 9, 2});
  CHECK(s.labels == std::vector<int>{0, 0, 1, 2, 1});
  CHECK(s.K == 3);
}

TEST_CASE("kmeans: trivial k") {
  Rng rng(1);
  const Matrix pts = test::random_matrix(15, 3, rng);
  const auto one = kmeans(pts, 1, rng);
  CHECK(std::all_of(one.segmentation.labels.begin(), one.segmentation.labels.end(),
                    [](int l) { return l == 0; }));
  const auto all = kmeans(pts, 15, rng);
  CHECK(all.wcss == Approx(0.0));
  CHECK(std::set<int>(all.segmentation.labels.begin(), all.segmentation.labels.end()).size() == 15);
  CHECK_THROWS_AS(kmeans(pts, 16, rng), Error);
  CHECK_THROWS_AS(kmeans(pts, 0, rng), Error);
}

TEST_CASE("kmeans: planted blobs recovered exactly") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::vector<int> truth;
    const Matrix pts = test::planted_blobs({20, 30, 25}, 4, 10.0, 0.5, rng, &truth);
    const auto r = kmeans(pts, 3, rng);
    CHECK(test::adjusted_rand_index(r.segmentation.labels, truth) == Approx(1.0));
    CHECK_FALSE(r.empty_cluster);
  }
}

TEST_CASE("kmeans: deterministic under a seed") {
  Rng data(3);
  const Matrix pts = test::random_matrix(60, 5, data);
  Rng a(9), b(9);
  const auto ra = kmeans(pts, 4, a);
  const auto rb = kmeans(pts, 4, b);
  CHECK(ra.segmentation.labels == rb.segmentation.labels);
  CHECK(ra.wcss == rb.wcss);
}

TEST_CASE("kmeans: duplicate points flag an empty cluster") {
  Rng rng(4);
  const Matrix pts = Matrix::Ones(6, 2);
  const auto r = kmeans(pts, 3, rng);
  CHECK(r.empty_cluster);
}

TEST_CASE("finch: two far-apart blobs form two components at the first level") {
  std::vector<int> truth;
  const Matrix pts = test::star_blobs(12, 16, 0.1, &truth);
  const auto levels = finch_levels(pts);
  REQUIRE(!levels.empty());
  CHECK(levels.front().K == 2);
  CHECK(test::adjusted_rand_index(levels.front().labels, truth) == Approx(1.0));
}

TEST_CASE("finch: first level on Gaussian blobs never mixes far-apart blobs") {
  Rng rng(5);
  std::vector<int> truth;
  const Matrix pts = test::planted_blobs({25, 25}, 3, 10.0, 0.3, rng, &truth);
  const auto first = finch_levels(pts).front();
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j)
      if (first.labels[i] == first.labels[j])
        CHECK(truth[i] == truth[j]);
}

TEST_CASE("finch: two frames join in one level") {
  Matrix pts(2, 2);
  pts << 1, 0, 0, 1;
  const auto levels = finch_levels(pts);
  REQUIRE(levels.size() == 1);
  CHECK(levels[0].labels == std::vector<int>{0, 0});
}

TEST_CASE("finch: level counts strictly decrease") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix pts = test::random_matrix(80, 6, rng);
    const auto levels = finch_levels(pts);
    for (std::size_t l = 1; l < levels.size(); ++l)
      CHECK(levels[l].K < levels[l - 1].K);
    CHECK(levels.back().K >= 1);
  }
}

TEST_CASE("finch: exact k on six planted classes") {
  Rng rng(7);
  std::vector<int> truth;
  const Matrix pts = test::planted_blobs({12, 15, 10, 14, 11, 13}, 8, 6.0, 0.4, rng, &truth);
  for (int k = 2; k <= 6; ++k) {
    const auto s = finch(pts, k);
    CHECK(s.K == k);
    CHECK(std::set<int>(s.labels.begin(), s.labels.end()).size() == static_cast<std::size_t>(k));
  }
  CHECK(test::adjusted_rand_index(finch(pts, 6).labels, truth) == Approx(1.0));
  const auto singles = finch(pts, static_cast<int>(pts.rows()));
  CHECK(singles.K == pts.rows());
  CHECK_THROWS_AS(finch(pts, static_cast<int>(pts.rows()) + 1), Error);
}

TEST_CASE("jacobi: 3x3 eigenvalues match the cubic roots") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix a = test::random_matrix(3, 3, rng, -5, 5);
    a = (a + a.transpose()).eval();
    const auto eig = jacobi_eigen(a);
    const auto roots = cubic_eigenvalues(a);
    for (int k = 0; k < 3; ++k)
      CHECK(std::abs(eig.values(k) - roots[static_cast<std::size_t>(k)]) <= 1e-10);
  }
}

TEST_CASE("jacobi: reconstruction and orthogonality") {
  Rng rng(9);
  Matrix a = test::random_matrix(12, 12, rng);
  a = (a + a.transpose()).eval();
  const auto eig = jacobi_eigen(a);
  const Matrix v = eig.vectors;
  CHECK((v.transpose() * v - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((v * eig.values.asDiagonal() * v.transpose() - a).cwiseAbs().maxCoeff() < 1e-9);
  for (Index k = 1; k < 12; ++k)
    CHECK(eig.values(k) >= eig.values(k - 1));
}

TEST_CASE("spectral: block-diagonal affinity") {
  Matrix a = Matrix::Zero(10, 10);
  a.topLeftCorner(4, 4).setOnes();
  a.bottomRightCorner(6, 6).setOnes();
  Rng rng(10);
  const auto r = spectral_from_affinity(a, 2, rng);
  const std::vector<int> truth{0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  CHECK(test::adjusted_rand_index(r.segmentation.labels, truth) == Approx(1.0));
  for (Index i = 0; i < r.embedding.rows(); ++i)
    CHECK(std::abs(r.embedding.row(i).norm() - 1.0) <= 1e-9);
}

TEST_CASE("spectral: planted points and trivial k") {
  Rng rng(11);
  std::vector<int> truth;
  const Matrix pts = test::planted_blobs({15, 15, 15}, 3, 8.0, 0.4, rng, &truth);
  const auto r = spectral(pts, 3, rng);
  CHECK(test::adjusted_rand_index(r.segmentation.labels, truth) == Approx(1.0));
  for (Index i = 0; i < r.embedding.rows(); ++i)
    CHECK(std::abs(r.embedding.row(i).norm() - 1.0) <= 1e-9);
  const auto s = spectral(pts, static_cast<int>(pts.rows()), rng);
  CHECK(s.segmentation.K == pts.rows());
  CHECK_THROWS_AS(spectral(pts, 1, rng), Error);
}

TEST_CASE("equal split") {
  CHECK(equal_split(6, 3).labels == std::vector<int>{0, 0, 1, 1, 2, 2});
  CHECK(equal_split(7, 3).labels == std::vector<int>{0, 0, 0, 1, 1, 2, 2});
  CHECK(equal_split(5, 1).labels == std::vector<int>(5, 0));
  CHECK(equal_split(4, 4).labels == std::vector<int>{0, 1, 2, 3});
  CHECK_THROWS_AS(equal_split(4, 5), Error);
  check_tiling(equal_split(103, 7));
}
