// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsa/data_io.hpp"
#include "tsa/rng.hpp"

namespace tsa {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// One-to-one assignment of predicted labels to ground-truth labels.
struct MatchResult {
  std::vector<int> mapping; ///< mapping[pred] = gt label, or -1 when unmatched
  CountMatrix overlap;      ///< K_pred x K_gt frame counts
  std::int64_t value = 0;   ///< total matched overlap
};

/// Maximum-weight assignment (Kuhn-Munkres with potentials on the square
/// zero-padded matrix). Exact in integer arithmetic.
MatchResult hungarian(const CountMatrix &overlap);

/// Frame counts for every (predicted, ground-truth) label pair.
CountMatrix contingency(const std::vector<int> &pred, const std::vector<int> &gt, int k_pred,
                        int k_gt);

/// Contingency plus Hungarian in one call.
MatchResult match_labels(const std::vector<int> &pred, const LabelSequence &gt);

double mof(const std::vector<int> &pred, const LabelSequence &gt, const MatchResult &match);
double iou(const std::vector<int> &pred, const LabelSequence &gt, const MatchResult &match);
double f1(const std::vector<int> &pred, const LabelSequence &gt, const MatchResult &match);

struct Scores {
  double mof = 0.0;
  double iou = 0.0;
  double f1 = 0.0;
  Index n_frames = 0;
  int k_pred = 0; ///< distinct predicted labels present
  int k_gt = 0;   ///< distinct ground-truth labels present

  bool operator==(const Scores &) const = default;
};

Scores score(const std::vector<int> &pred, const LabelSequence &gt);

/// {"mof":..,"iou":..,"f1":..,"n_frames":..,"k_pred":..,"k_gt":..}
std::string scores_json(const Scores &scores);

/// Drops floor(tau * #background) background frames chosen uniformly at
/// random. Returns the surviving frame indices in order.
std::vector<Index> remove_background(const LabelSequence &gt, double tau, Rng &rng);

/// Keep only `kept` entries (in order) of a per-frame sequence.
std::vector<int> filter_frames(const std::vector<int> &values, const std::vector<Index> &kept);
LabelSequence filter_frames(const LabelSequence &labels, const std::vector<Index> &kept);
Matrix filter_frames(const Matrix &rows, const std::vector<Index> &kept);

} // namespace tsa
