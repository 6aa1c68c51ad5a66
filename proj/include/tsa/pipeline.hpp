// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "tsa/cluster.hpp"
#include "tsa/evaluate.hpp"
#include "tsa/model.hpp"

namespace tsa {

enum class ClusterMethod { kmeans, finch, spectral, equal };

ClusterMethod parse_cluster_method(const std::string &name);
const char *to_string(ClusterMethod method) noexcept;

/// Dispatch to one clusterer. Stochastic methods draw from Rng(seed).
Segmentation segment(const Matrix &features, ClusterMethod method, int k, std::uint64_t seed);

/// Distinct labels that occur in `labels`.
int distinct_labels(const std::vector<int> &labels);

struct VideoRun {
  Scores scores;
  Segmentation prediction;
  TrainState train_state;
};

/// train -> segment (k = ground-truth class count) -> score. With `tau`, a
/// seeded fraction of background frames is dropped before scoring only;
/// training always sees the full video.
VideoRun run_video(const FeatureMatrix &X, const LabelSequence &gt, const RunConfig &config,
                   ClusterMethod method, std::optional<double> tau = std::nullopt);

/// Same protocol on the untouched input features (no training).
VideoRun run_baseline(const FeatureMatrix &X, const LabelSequence &gt, ClusterMethod method,
                      std::uint64_t seed, std::optional<double> tau = std::nullopt);

} // namespace tsa
