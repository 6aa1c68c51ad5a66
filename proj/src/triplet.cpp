// SPDX-License-Identifier: Apache-2.0
#include "tsa/triplet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsa {

DownsampleSet stochastic_pool(const AffinityMatrix &f_ts, Index batch, Rng &rng, Pooling mode) {
  const Index n = f_ts.size();
  if (batch < 1 || batch > n)
    throw Error(ErrorCode::InvalidArgument, "batch size " + std::to_string(batch) +
                                                " must lie in [1, N=" + std::to_string(n) + "]");
  DownsampleSet out;
  out.batch = batch;
  out.indices.reserve(static_cast<std::size_t>((n + batch - 1) / batch));
  const Rng base(rng.next_u64());
  for (Index start = 0, window = 0; start < n; start += batch, ++window) {
    const Index end = std::min(n, start + batch);
    Rng local = base.split(static_cast<std::uint64_t>(window));
    if (mode == Pooling::uniform || end - start == 1) {
      out.indices.push_back(start + static_cast<Index>(local.index(end - start)));
      continue;
    }
    double mass = 0.0;
    for (Index i = start; i < end; ++i)
      mass += f_ts.rows(i, i);
    double u = local.uniform() * mass;
    Index pick = end - 1;
    for (Index i = start; i < end; ++i) {
      u -= f_ts.rows(i, i);
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    out.indices.push_back(pick);
  }
  return out;
}

std::vector<Index> positive_set(const AffinityMatrix &f_ts, Index anchor, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "positive fraction must lie in (0, 1)");
  const Index n = f_ts.size();
  // The 1e-9 guard keeps exact products such as 0.05 * 100 from rounding up.
  auto count = static_cast<Index>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  count = std::clamp<Index>(count, 1, n - 1);

  std::vector<Index> candidates;
  candidates.reserve(static_cast<std::size_t>(n - 1));
  for (Index j = 0; j < n; ++j)
    if (j != anchor)
      candidates.push_back(j);
  const auto &row = f_ts.rows;
  std::partial_sort(candidates.begin(), candidates.begin() + count, candidates.end(),
                    [&](Index a, Index b) {
                      if (row(anchor, a) != row(anchor, b))
                        return row(anchor, a) > row(anchor, b);
                      const auto da = std::abs(a - anchor), db = std::abs(b - anchor);
                      if (da != db)
                        return da < db;
                      return a < b;
                    });
  candidates.resize(static_cast<std::size_t>(count));
  return candidates;
}

std::vector<Index> negative_set(const AffinityMatrix &f_ts, Index anchor,
                                const std::vector<Index> &exclude) {
  const Index n = f_ts.size();
  const auto &row = f_ts.rows;
  double mean = 0.0;
  for (Index j = 0; j < n; ++j)
    if (j != anchor)
      mean += row(anchor, j);
  mean /= static_cast<double>(n - 1);
  double var = 0.0;
  for (Index j = 0; j < n; ++j)
    if (j != anchor)
      var += (row(anchor, j) - mean) * (row(anchor, j) - mean);
  const double sd = std::sqrt(var / static_cast<double>(n - 1));
  // Equal entries can average to a mean one ulp away from themselves.
  const double tol = 1e-12 * std::max(std::abs(mean), 1e-300);

  auto admissible = [&](Index j) {
    return j != anchor && std::find(exclude.begin(), exclude.end(), j) == exclude.end();
  };
  std::vector<Index> out;
  for (Index j = 0; j < n; ++j) {
    const double v = row(anchor, j);
    if (admissible(j) && v >= mean - tol && v <= mean + sd + tol)
      out.push_back(j);
  }
  if (!out.empty())
    return out;

  Index best = -1;
  double best_gap = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (!admissible(j))
      continue;
    const double gap = std::abs(row(anchor, j) - mean);
    if (best < 0 || gap < best_gap) {
      best = j;
      best_gap = gap;
    }
  }
  if (best >= 0)
    out.push_back(best);
  return out;
}

std::vector<Triplet> sample_triplets(const AffinityMatrix &f_ts, const DownsampleSet &anchors,
                                     int per_anchor, Rng &rng, double positive_fraction) {
  if (per_anchor < 1)
    throw Error(ErrorCode::InvalidArgument, "per_anchor must be at least 1");
  const Rng base(rng.next_u64());
  std::vector<Triplet> out;
  out.reserve(anchors.indices.size() * static_cast<std::size_t>(per_anchor));
  for (const Index anchor : anchors.indices) {
    const auto positives = positive_set(f_ts, anchor, positive_fraction);
    const auto negatives = negative_set(f_ts, anchor, positives);
    if (negatives.empty())
      continue;
    Rng local = base.split(static_cast<std::uint64_t>(anchor));
    for (int t = 0; t < per_anchor; ++t) {
      const auto p = positives[local.index(positives.size())];
      const auto q = negatives[local.index(negatives.size())];
      out.push_back({anchor, p, q});
    }
  }
  return out;
}

} // namespace tsa
