// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "tsa/error.hpp"
#include "tsa/similarity.hpp"
#include "tsa/triplet.hpp"

using namespace tsa;

namespace {

AffinityMatrix uniform_affinity(Index n) {
  return {Matrix::Constant(n, n, 1.0 / static_cast<double>(n)), AffinityKind::combined};
}

AffinityMatrix random_affinity(Index n, Rng &rng) {
  return {test::random_pdf_rows(n, rng), AffinityKind::combined};
}

bool contains(const std::vector<Index> &v, Index x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

} // namespace

TEST_CASE("pool: extreme batch sizes") {
  Rng rng(1);
  const auto f = uniform_affinity(10);
  CHECK(stochastic_pool(f, 10, rng).indices.size() == 1);
  const auto all = stochastic_pool(f, 1, rng);
  std::vector<Index> expect(10);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all.indices == expect);
  CHECK_THROWS_AS(stochastic_pool(f, 11, rng), Error);
  CHECK_THROWS_AS(stochastic_pool(f, 0, rng), Error);
}

TEST_CASE("pool: one index per window, strictly increasing") {
  Rng rng(2);
  const auto f = random_affinity(23, rng);
  for (Index b : {2, 3, 5, 7, 23}) {
    const auto d = stochastic_pool(f, b, rng);
    CHECK(d.batch == b);
    REQUIRE(d.indices.size() == static_cast<std::size_t>((23 + b - 1) / b));
    for (std::size_t w = 0; w < d.indices.size(); ++w) {
      CHECK(d.indices[w] / b == static_cast<Index>(w));
      if (w > 0)
        CHECK(d.indices[w] > d.indices[w - 1]);
    }
  }
}

TEST_CASE("pool: Monte-Carlo frequency on a uniform affinity") {
  const auto f = uniform_affinity(6);
  std::array<int, 6> hits{};
  Rng rng(3);
  const int draws = 10000;
  for (int t = 0; t < draws; ++t)
    for (Index i : stochastic_pool(f, 3, rng).indices)
      ++hits[static_cast<std::size_t>(i)];
  for (int h : hits)
    CHECK(std::abs(h / double(draws) - 1.0 / 3.0) <= 0.05);
}

TEST_CASE("pool: frequency follows self-affinity") {
  Matrix m = Matrix::Constant(4, 4, 0.1);
  m.diagonal() << 0.1, 0.3, 0.2, 0.2;
  const AffinityMatrix f{m, AffinityKind::combined};
  std::array<int, 4> hits{};
  Rng rng(4);
  const int draws = 20000;
  for (int t = 0; t < draws; ++t)
    for (Index i : stochastic_pool(f, 2, rng).indices)
      ++hits[static_cast<std::size_t>(i)];
  CHECK(std::abs(hits[0] / double(draws) - 0.25) <= 0.02);
  CHECK(std::abs(hits[1] / double(draws) - 0.75) <= 0.02);
  CHECK(std::abs(hits[2] / double(draws) - 0.5) <= 0.02);
  std::array<int, 4> flat{};
  for (int t = 0; t < draws; ++t)
    for (Index i : stochastic_pool(f, 2, rng, Pooling::uniform).indices)
      ++flat[static_cast<std::size_t>(i)];
  CHECK(std::abs(flat[1] / double(draws) - 0.5) <= 0.02);
}

TEST_CASE("positives: size and tie-break") {
  const auto f = uniform_affinity(100);
  const auto p = positive_set(f, 50, 0.05);
  CHECK(p.size() == 5);
  CHECK(std::set<Index>(p.begin(), p.end()) == std::set<Index>{48, 49, 51, 52, 47});
  const auto p0 = positive_set(f, 0, 0.05);
  CHECK(std::set<Index>(p0.begin(), p0.end()) == std::set<Index>{1, 2, 3, 4, 5});
  CHECK(positive_set(uniform_affinity(21), 3, 0.05).size() == 2);
  CHECK(positive_set(uniform_affinity(20), 3, 0.05).size() == 1);
}

TEST_CASE("positives: dominant entry included") {
  Rng rng(6);
  auto f = random_affinity(40, rng);
  f.rows(7, 33) = 5.0;
  const auto p = positive_set(f, 7);
  CHECK(contains(p, 33));
  CHECK_FALSE(contains(p, 7));
}

TEST_CASE("negatives: band, exclusion and fallback") {
  Matrix m(3, 3);
  m << 0.7, 0.2, 0.1, 0.2, 0.7, 0.1, 0.1, 0.2, 0.7;
  const AffinityMatrix f{m, AffinityKind::combined};
  // Off-diagonal row 0: {0.2, 0.1} -> mean 0.15, population sd 0.05, band [0.15, 0.2].
  CHECK(negative_set(f, 0) == std::vector<Index>{1});
  // With the positive {1} removed the band is empty; the nearest-to-mean frame is 2.
  const auto pos = positive_set(f, 0);
  CHECK(pos == std::vector<Index>{1});
  CHECK(negative_set(f, 0, pos) == std::vector<Index>{2});
}

TEST_CASE("negatives: constant row admits all non-anchor frames") {
  const auto f = uniform_affinity(8);
  CHECK(negative_set(f, 3) == std::vector<Index>{0, 1, 2, 4, 5, 6, 7});
}

TEST_CASE("negatives: bimodal row falls back to the frame nearest the mean") {
  Matrix m = Matrix::Zero(7, 7);
  m.row(0) << 0.3, 0.2, 0.2, 0.2, 0.05, 0.04, 0.01;
  const AffinityMatrix f{m, AffinityKind::combined};
  const auto neg = negative_set(f, 0);
  REQUIRE(!neg.empty());
  double mu = 0;
  for (Index j = 1; j < 7; ++j)
    mu += m(0, j) / 6.0;
  double sd = 0;
  for (Index j = 1; j < 7; ++j)
    sd += (m(0, j) - mu) * (m(0, j) - mu) / 6.0;
  sd = std::sqrt(sd);
  for (Index j : neg)
    CHECK((m(0, j) >= mu && m(0, j) <= mu + sd));
  Matrix gap = Matrix::Zero(5, 5);
  gap.row(0) << 0.2, 0.38, 0.38, 0.02, 0.02;
  const AffinityMatrix g{gap, AffinityKind::combined};
  // mean 0.2, sd 0.18; band [0.2, 0.38] holds frames 1 and 2 (the positives).
  const auto p = positive_set(g, 0, 0.2);
  CHECK(p == std::vector<Index>{1});
  const auto n = negative_set(g, 0, p);
  CHECK(n == std::vector<Index>{2});
  const auto n2 = negative_set(g, 0, {1, 2});
  REQUIRE(n2.size() == 1);
  CHECK((n2[0] == 3 || n2[0] == 4));
}

TEST_CASE("triplets: counts, membership and determinism") {
  Rng seed_rng(7);
  const auto f = random_affinity(64, seed_rng);
  Rng a(99), b(99);
  const auto d = stochastic_pool(f, 8, a);
  const auto d2 = stochastic_pool(f, 8, b);
  REQUIRE(d.indices == d2.indices);
  REQUIRE(d.indices.size() == 8);
  const auto ta = sample_triplets(f, d, 1, a);
  const auto tb = sample_triplets(f, d2, 1, b);
  CHECK(ta.size() == 8);
  CHECK(ta == tb);
  const auto many = sample_triplets(f, d, 3, a);
  CHECK(many.size() == 24);
  for (const auto &t : many) {
    const auto p = positive_set(f, t.anchor);
    CHECK(contains(p, t.positive));
    CHECK(contains(negative_set(f, t.anchor, p), t.negative));
    CHECK(t.anchor != t.positive);
    CHECK(t.anchor != t.negative);
    CHECK(t.positive != t.negative);
  }
}

TEST_CASE("triplets: positive and negative sets never overlap") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 5 + static_cast<Index>(rng.index(40));
    const auto f = random_affinity(n, rng);
    for (Index i = 0; i < n; ++i) {
      const auto p = positive_set(f, i);
      CHECK(p.size() == static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n))));
      const auto neg = negative_set(f, i, p);
      CHECK(!neg.empty());
      for (Index j : neg)
        CHECK_FALSE(contains(p, j));
    }
  }
}
