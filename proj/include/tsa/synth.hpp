// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>

#include "tsa/data_io.hpp"

namespace tsa {

/// Planted single-video benchmark: contiguous segments of recurring action
/// classes, each frame a class centre plus isotropic Gaussian noise.
struct SynthSpec {
  int n_segments = 6;
  int min_frames_per_segment = 35;
  int max_frames_per_segment = 45;
  int dims = 16;
  int n_action_classes = 4;
  double noise_sigma = 0.15;
  double center_separation = 1.0;
  std::uint64_t seed = 0;
  /// Insert a background segment (own centre, token "background") between
  /// consecutive action segments.
  bool background = false;

  void validate() const;
};

struct SynthVideo {
  FeatureMatrix features;
  LabelSequence labels;
  std::vector<int> segment_classes; ///< class id of each action segment, in order
};

/// Throws SeparationUnreachable when 1000 draws cannot place the centres.
SynthVideo generate(const SynthSpec &spec);

} // namespace tsa
