// SPDX-License-Identifier: Apache-2.0
#include "tsa/synth.hpp"

#include <algorithm>
#include <string>

#include "tsa/rng.hpp"

namespace tsa {

namespace {

constexpr int kPlacementAttempts = 1000;

Vector random_unit(int dims, Rng &rng) {
  Vector v(dims);
  do {
    for (int d = 0; d < dims; ++d)
      v(d) = rng.normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

Matrix place_centers(int count, int dims, double separation, Rng &rng) {
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    Matrix centers(count, dims);
    bool ok = true;
    for (int c = 0; c < count && ok; ++c) {
      centers.row(c) = random_unit(dims, rng).transpose();
      for (int prev = 0; prev < c && ok; ++prev)
        ok = (centers.row(c) - centers.row(prev)).norm() >= separation;
    }
    if (ok)
      return centers;
  }
  throw Error(ErrorCode::SeparationUnreachable,
              "cannot place " + std::to_string(count) + " unit centres " +
                  std::to_string(separation) + " apart in " + std::to_string(dims) +
                  " dims after " + std::to_string(kPlacementAttempts) + " attempts");
}

/// Every class appears once (shuffled), the rest recur; neighbours differ.
std::vector<int> segment_order(const SynthSpec &spec, Rng &rng) {
  std::vector<int> order(static_cast<std::size_t>(spec.n_action_classes));
  for (int c = 0; c < spec.n_action_classes; ++c)
    order[c] = c;
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.index(i)]);
  while (static_cast<int>(order.size()) < spec.n_segments) {
    if (spec.n_action_classes == 1) {
      order.push_back(0);
      continue;
    }
    int c = static_cast<int>(rng.index(static_cast<std::uint64_t>(spec.n_action_classes - 1)));
    if (c >= order.back())
      ++c;
    order.push_back(c);
  }
  return order;
}

} // namespace

void SynthSpec::validate() const {
  auto fail = [](const std::string &what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (n_segments < 1) fail("n_segments must be positive");
  if (n_action_classes < 1 || n_action_classes > n_segments)
    fail("n_action_classes must lie in [1, n_segments]");
  if (min_frames_per_segment < 1 || max_frames_per_segment < min_frames_per_segment)
    fail("frames per segment range must satisfy 1 <= min <= max");
  if (dims < 1) fail("dims must be positive");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be non-negative");
  if (!(center_separation >= 0.0)) fail("center_separation must be non-negative");
}

SynthVideo generate(const SynthSpec &spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int classes = spec.n_action_classes + (spec.background ? 1 : 0);
  const Matrix centers = place_centers(classes, spec.dims, spec.center_separation, rng);
  const auto order = segment_order(spec, rng);

  // (class, length) runs; background centre is the last row.
  std::vector<std::pair<int, int>> runs;
  const auto span = static_cast<std::uint64_t>(spec.max_frames_per_segment -
                                               spec.min_frames_per_segment + 1);
  for (std::size_t s = 0; s < order.size(); ++s) {
    if (spec.background && s > 0)
      runs.emplace_back(spec.n_action_classes,
                        spec.min_frames_per_segment + static_cast<int>(rng.index(span)));
    runs.emplace_back(order[s], spec.min_frames_per_segment + static_cast<int>(rng.index(span)));
  }
  Index frames = 0;
  for (const auto &run : runs)
    frames += run.second;
  if (frames < 2)
    throw Error(ErrorCode::InvalidArgument, "synthetic video needs at least 2 frames");

  Matrix X(frames, spec.dims);
  std::vector<int> class_of_frame;
  class_of_frame.reserve(static_cast<std::size_t>(frames));
  Index row = 0;
  for (const auto &[cls, length] : runs)
    for (int f = 0; f < length; ++f, ++row) {
      for (int d = 0; d < spec.dims; ++d)
        X(row, d) = centers(cls, d) + spec.noise_sigma * rng.normal();
      class_of_frame.push_back(cls);
    }

  // Token text carries the class; ids are assigned by first appearance.
  std::string text;
  for (const int cls : class_of_frame)
    text += (cls == spec.n_action_classes ? std::string("background") : "a" + std::to_string(cls)) + "\n";
  auto labels = parse_labels(text, spec.background ? std::optional<std::string>("background")
                                                   : std::nullopt);
  return {FeatureMatrix(std::move(X)), std::move(labels), order};
}

} // namespace tsa
