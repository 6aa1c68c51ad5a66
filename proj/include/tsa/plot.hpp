// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tsa/data_io.hpp"

namespace tsa {

struct NamedLabels {
  std::string name;
  std::vector<int> labels;
};

/// Horizontal segmentation bars, ground truth first. Predicted labels are
/// recoloured through their Hungarian match against the ground truth so
/// matched actions share a colour; unmatched clusters get colours of their own.
/// Each bar emits one <rect> per contiguous run.
std::string render_segmentation_svg(const LabelSequence &gt, const std::vector<NamedLabels> &preds);

} // namespace tsa
