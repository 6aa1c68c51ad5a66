// SPDX-License-Identifier: Apache-2.0
#include "tsa/pipeline.hpp"

#include <set>

namespace tsa {

namespace {

Scores score_with_background(const Segmentation &prediction, const LabelSequence &gt,
                             std::optional<double> tau, std::uint64_t seed) {
  if (!tau)
    return score(prediction.labels, gt);
  Rng rng(splitmix64(seed ^ 0x6267ULL));
  const auto kept = remove_background(gt, *tau, rng);
  return score(filter_frames(prediction.labels, kept), filter_frames(gt, kept));
}

} // namespace

ClusterMethod parse_cluster_method(const std::string &name) {
  if (name == "kmeans") return ClusterMethod::kmeans;
  if (name == "finch") return ClusterMethod::finch;
  if (name == "spectral") return ClusterMethod::spectral;
  if (name == "equal") return ClusterMethod::equal;
  throw Error(ErrorCode::InvalidArgument,
              "unknown clustering method '" + name + "' (expected kmeans|finch|spectral|equal)");
}

const char *to_string(ClusterMethod method) noexcept {
  switch (method) {
  case ClusterMethod::kmeans: return "kmeans";
  case ClusterMethod::finch: return "finch";
  case ClusterMethod::spectral: return "spectral";
  case ClusterMethod::equal: return "equal";
  }
  return "unknown";
}

Segmentation segment(const Matrix &features, ClusterMethod method, int k, std::uint64_t seed) {
  Rng rng(seed);
  switch (method) {
  case ClusterMethod::kmeans: return kmeans(features, k, rng).segmentation;
  case ClusterMethod::finch: return finch(features, k);
  case ClusterMethod::spectral: return spectral(features, k, rng).segmentation;
  case ClusterMethod::equal: return equal_split(features.rows(), k);
  }
  throw Error(ErrorCode::Internal, "unhandled clustering method");
}

int distinct_labels(const std::vector<int> &labels) {
  return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

VideoRun run_video(const FeatureMatrix &X, const LabelSequence &gt, const RunConfig &config,
                   ClusterMethod method, std::optional<double> tau) {
  if (gt.size() != static_cast<std::size_t>(X.frames()))
    throw Error(ErrorCode::LengthMismatch, "features have " + std::to_string(X.frames()) +
                                               " frames, labels have " +
                                               std::to_string(gt.size()));
  auto trained = train(X, config);
  VideoRun run;
  run.prediction = segment(trained.Z, method, distinct_labels(gt.labels), config.seed);
  run.scores = score_with_background(run.prediction, gt, tau, config.seed);
  run.train_state = std::move(trained.state);
  return run;
}

VideoRun run_baseline(const FeatureMatrix &X, const LabelSequence &gt, ClusterMethod method,
                      std::uint64_t seed, std::optional<double> tau) {
  if (gt.size() != static_cast<std::size_t>(X.frames()))
    throw Error(ErrorCode::LengthMismatch, "features and labels differ in frame count");
  VideoRun run;
  run.prediction = segment(X.values(), method, distinct_labels(gt.labels), seed);
  run.scores = score_with_background(run.prediction, gt, tau, seed);
  return run;
}

} // namespace tsa
