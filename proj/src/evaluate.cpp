// SPDX-License-Identifier: Apache-2.0
#include "tsa/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace tsa {

namespace {

void require_same_length(std::size_t pred, std::size_t gt) {
  if (pred != gt)
    throw Error(ErrorCode::LengthMismatch, "prediction has " + std::to_string(pred) +
                                               " frames, ground truth has " + std::to_string(gt));
}

int label_count(const std::vector<int> &labels) {
  int k = 0;
  for (const int l : labels) {
    if (l < 0)
      throw Error(ErrorCode::InvalidArgument, "negative label " + std::to_string(l));
    k = std::max(k, l + 1);
  }
  return k;
}

/// Frames per ground-truth class, and the classes that actually occur.
std::vector<std::int64_t> class_sizes(const MatchResult &match) {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(match.overlap.cols()), 0);
  for (Index c = 0; c < match.overlap.cols(); ++c)
    sizes[c] = match.overlap.col(c).sum();
  return sizes;
}

std::vector<int> inverse_mapping(const MatchResult &match) {
  std::vector<int> inverse(static_cast<std::size_t>(match.overlap.cols()), -1);
  for (std::size_t p = 0; p < match.mapping.size(); ++p)
    if (match.mapping[p] >= 0)
      inverse[match.mapping[p]] = static_cast<int>(p);
  return inverse;
}

template <class PerClass> double macro_average(const MatchResult &match, PerClass per_class) {
  const auto gt_sizes = class_sizes(match);
  const auto inverse = inverse_mapping(match);
  double total = 0.0;
  int classes = 0;
  for (std::size_t c = 0; c < gt_sizes.size(); ++c) {
    if (gt_sizes[c] == 0)
      continue;
    ++classes;
    const int p = inverse[c];
    if (p < 0)
      continue;
    const auto hit = match.overlap(p, static_cast<Index>(c));
    const auto pred_size = match.overlap.row(p).sum();
    total += per_class(hit, pred_size, gt_sizes[c]);
  }
  return classes ? total / classes : 0.0;
}

} // namespace

MatchResult hungarian(const CountMatrix &overlap) {
  const Index rows = overlap.rows(), cols = overlap.cols();
  if (rows == 0 || cols == 0)
    throw Error(ErrorCode::InvalidArgument, "Hungarian matching needs a non-empty matrix");
  if (overlap.minCoeff() < 0)
    throw Error(ErrorCode::InvalidArgument, "overlap counts must be non-negative");
  const Index n = std::max(rows, cols);

  // Ties in total overlap are broken by the summed per-pair IoU + F1 (quantized),
  // which depends only on the table and not on label ids.
  constexpr std::int64_t kQuant = 1'000'000;
  const std::int64_t scale = 2 * kQuant * n + 1;
  const bool tie_break =
      overlap.maxCoeff() < std::numeric_limits<std::int64_t>::max() / 16 / scale / (n + 1);
  const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> row_sum = overlap.rowwise().sum();
  const Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic> col_sum = overlap.colwise().sum();
  CountMatrix weight = overlap;
  if (tie_break)
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        const auto both = static_cast<double>(overlap(i, j));
        const auto sizes = static_cast<double>(row_sum(i) + col_sum(j));
        const double quality = sizes > 0 ? both / (sizes - both) + 2.0 * both / sizes : 0.0;
        weight(i, j) = overlap(i, j) * scale + std::llround(quality * kQuant);
      }
  const std::int64_t top = weight.maxCoeff();
  // cost(i, j) on 1-based indices of the padded square problem.
  auto cost = [&](Index i, Index j) -> std::int64_t {
    const std::int64_t w = (i <= rows && j <= cols) ? weight(i - 1, j - 1) : 0;
    return top - w;
  };
  constexpr auto inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0), min_v(n + 1);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(min_v.begin(), min_v.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      std::int64_t delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j])
          continue;
        const auto reduced = cost(i0, j) - u[i0] - v[j];
        if (reduced < min_v[j]) {
          min_v[j] = reduced;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  MatchResult out;
  out.overlap = overlap;
  out.mapping.assign(static_cast<std::size_t>(rows), -1);
  for (Index j = 1; j <= n; ++j) {
    const Index i = p[j];
    if (i >= 1 && i <= rows && j <= cols) {
      out.mapping[i - 1] = static_cast<int>(j - 1);
      out.value += overlap(i - 1, j - 1);
    }
  }
  return out;
}

CountMatrix contingency(const std::vector<int> &pred, const std::vector<int> &gt, int k_pred,
                        int k_gt) {
  require_same_length(pred.size(), gt.size());
  CountMatrix counts = CountMatrix::Zero(k_pred, k_gt);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= k_pred || gt[i] < 0 || gt[i] >= k_gt)
      throw Error(ErrorCode::InvalidArgument, "label out of range at frame " + std::to_string(i));
    ++counts(pred[i], gt[i]);
  }
  return counts;
}

MatchResult match_labels(const std::vector<int> &pred, const LabelSequence &gt) {
  require_same_length(pred.size(), gt.size());
  if (pred.empty())
    throw Error(ErrorCode::InvalidArgument, "cannot match empty label sequences");
  const int k_gt = std::max(gt.classes(), label_count(gt.labels));
  return hungarian(contingency(pred, gt.labels, label_count(pred), k_gt));
}

double mof(const std::vector<int> &pred, const LabelSequence &gt, const MatchResult &match) {
  require_same_length(pred.size(), gt.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (match.mapping[pred[i]] == gt.labels[i])
      ++correct;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double iou(const std::vector<int> &pred, const LabelSequence &gt, const MatchResult &match) {
  require_same_length(pred.size(), gt.size());
  return macro_average(match, [](std::int64_t hit, std::int64_t pred_size, std::int64_t gt_size) {
    const auto uni = pred_size + gt_size - hit;
    return uni ? static_cast<double>(hit) / static_cast<double>(uni) : 0.0;
  });
}

double f1(const std::vector<int> &pred, const LabelSequence &gt, const MatchResult &match) {
  require_same_length(pred.size(), gt.size());
  return macro_average(match, [](std::int64_t hit, std::int64_t pred_size, std::int64_t gt_size) {
    const double precision = pred_size ? static_cast<double>(hit) / pred_size : 0.0;
    const double recall = gt_size ? static_cast<double>(hit) / gt_size : 0.0;
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  });
}

Scores score(const std::vector<int> &pred, const LabelSequence &gt) {
  const auto match = match_labels(pred, gt);
  Scores s;
  s.mof = mof(pred, gt, match);
  s.iou = iou(pred, gt, match);
  s.f1 = f1(pred, gt, match);
  s.n_frames = static_cast<Index>(pred.size());
  for (Index r = 0; r < match.overlap.rows(); ++r)
    s.k_pred += match.overlap.row(r).sum() > 0;
  for (Index c = 0; c < match.overlap.cols(); ++c)
    s.k_gt += match.overlap.col(c).sum() > 0;
  return s;
}

std::string scores_json(const Scores &s) {
  nlohmann::ordered_json j;
  j["mof"] = s.mof;
  j["iou"] = s.iou;
  j["f1"] = s.f1;
  j["n_frames"] = s.n_frames;
  j["k_pred"] = s.k_pred;
  j["k_gt"] = s.k_gt;
  return j.dump();
}

std::vector<Index> remove_background(const LabelSequence &gt, double tau, Rng &rng) {
  if (!gt.background_id)
    throw Error(ErrorCode::MissingBackground,
                "background removal needs a background label present in the ground truth");
  if (!(tau >= 0.0 && tau <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
  std::vector<Index> background;
  for (std::size_t i = 0; i < gt.labels.size(); ++i)
    if (gt.labels[i] == *gt.background_id)
      background.push_back(static_cast<Index>(i));
  const auto drop = static_cast<std::size_t>(std::floor(tau * static_cast<double>(background.size())));
  // Partial Fisher-Yates: the first `drop` slots become the removed frames.
  for (std::size_t i = 0; i < drop; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.index(background.size() - i));
    std::swap(background[i], background[j]);
  }
  std::vector<char> removed(gt.labels.size(), 0);
  for (std::size_t i = 0; i < drop; ++i)
    removed[background[i]] = 1;
  std::vector<Index> kept;
  kept.reserve(gt.labels.size() - drop);
  for (std::size_t i = 0; i < gt.labels.size(); ++i)
    if (!removed[i])
      kept.push_back(static_cast<Index>(i));
  return kept;
}

std::vector<int> filter_frames(const std::vector<int> &values, const std::vector<Index> &kept) {
  std::vector<int> out;
  out.reserve(kept.size());
  for (const Index i : kept) {
    if (i < 0 || static_cast<std::size_t>(i) >= values.size())
      throw Error(ErrorCode::LengthMismatch, "kept index " + std::to_string(i) + " out of range");
    out.push_back(values[i]);
  }
  return out;
}

LabelSequence filter_frames(const LabelSequence &labels, const std::vector<Index> &kept) {
  LabelSequence out = labels;
  out.labels = filter_frames(labels.labels, kept);
  return out;
}

Matrix filter_frames(const Matrix &rows, const std::vector<Index> &kept) {
  Matrix out(static_cast<Index>(kept.size()), rows.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    if (kept[r] < 0 || kept[r] >= rows.rows())
      throw Error(ErrorCode::LengthMismatch, "kept index out of range");
    out.row(static_cast<Index>(r)) = rows.row(kept[r]);
  }
  return out;
}

} // namespace tsa
