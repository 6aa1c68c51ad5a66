// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "tsa/rng.hpp"
#include "tsa/similarity.hpp"

namespace tsa {


/// One representative frame per contiguous window of `batch` frames.
struct DownsampleSet {
  std::vector<Index> indices; ///< strictly increasing
  Index batch = 1;
};

struct Triplet {
  Index anchor = 0;
  Index positive = 0;
  Index negative = 0;

  bool operator==(const Triplet &) const = default;
};

/// Windowed stochastic pooling. In `self_affinity` mode frame i wins its
/// window with probability proportional to f_ts(i, i); `uniform` ignores the
/// affinity. Throws InvalidArgument when batch is outside [1, N].
DownsampleSet stochastic_pool(const AffinityMatrix &f_ts, Index batch, Rng &rng,
                              Pooling mode = Pooling::self_affinity);

/// The ceil(fraction * N) frames j != i with largest f_ts(i, j). Ties go to
/// the temporally closer frame, then the smaller index. Returned best first.
std::vector<Index> positive_set(const AffinityMatrix &f_ts, Index anchor,
                                double fraction = 0.05);

/// Frames j != i with mu_i <= f_ts(i, j) <= mu_i + sigma_i, where the row
/// statistics skip the diagonal. Members of `exclude` are removed; if nothing
/// remains, the admissible frame closest to mu_i is returned alone. May be
/// empty only when no admissible frame exists at all (N = 2).
std::vector<Index> negative_set(const AffinityMatrix &f_ts, Index anchor,
                                const std::vector<Index> &exclude = {});

/// Draws `per_anchor` (positive, negative) pairs uniformly from P_i x N_i for
/// every anchor in D. Anchor streams are split from `rng` by frame index.
std::vector<Triplet> sample_triplets(const AffinityMatrix &f_ts, const DownsampleSet &anchors,
                                     int per_anchor, Rng &rng, double positive_fraction = 0.05);

} // namespace tsa
