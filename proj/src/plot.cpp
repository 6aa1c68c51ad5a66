// SPDX-License-Identifier: Apache-2.0
#include "tsa/plot.hpp"

#include <cstdio>

#include "tsa/cluster.hpp"
#include "tsa/evaluate.hpp"

namespace tsa {

namespace {

constexpr double kWidth = 960.0;
constexpr double kLeft = 150.0;
constexpr double kTop = 20.0;
constexpr double kBarHeight = 28.0;
constexpr double kBarGap = 14.0;
constexpr double kLegendRow = 20.0;

// Tableau-like qualitative palette; cycles with a lightness shift past its end.
constexpr const char *kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
                                    "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8"};
constexpr int kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string colour(int index) {
  if (index < kPaletteSize)
    return kPalette[index];
  // Deterministic fallback hue walk for very large label sets.
  char buf[32];
  std::snprintf(buf, sizeof buf, "hsl(%d,55%%,%d%%)", (index * 47) % 360, 35 + (index % 3) * 15);
  return buf;
}

std::string escape(const std::string &text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    case '\'': out += "&apos;"; break;
    default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void draw_bar(std::string &svg, const std::string &name, const std::vector<int> &colour_ids,
              double y, double scale) {
  svg += "  <g class=\"bar\">\n";
  svg += "    <text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + kBarHeight * 0.65) +
         "\" text-anchor=\"end\">" + escape(name) + "</text>\n";
  const auto runs = Segmentation{colour_ids, 0}.segments();
  for (const auto &run : runs)
    svg += "    <rect x=\"" + num(kLeft + scale * static_cast<double>(run.start)) + "\" y=\"" +
           num(y) + "\" width=\"" + num(scale * static_cast<double>(run.end - run.start)) +
           "\" height=\"" + num(kBarHeight) + "\" fill=\"" + colour(run.label) + "\"/>\n";
  svg += "  </g>\n";
}

} // namespace

std::string render_segmentation_svg(const LabelSequence &gt, const std::vector<NamedLabels> &preds) {
  const auto frames = gt.labels.size();
  if (frames == 0)
    throw Error(ErrorCode::InvalidArgument, "cannot plot an empty label sequence");
  const int k_gt = std::max(gt.classes(), *std::max_element(gt.labels.begin(), gt.labels.end()) + 1);

  // Colour ids per bar; unmatched predicted clusters are numbered after the gt classes.
  std::vector<std::vector<int>> bars;
  std::vector<std::string> legend_names;
  for (int c = 0; c < k_gt; ++c)
    legend_names.push_back(c < gt.classes() ? gt.names[c] : std::to_string(c));
  bars.push_back(gt.labels);
  int next_free = k_gt;
  for (const auto &pred : preds) {
    if (pred.labels.size() != frames)
      throw Error(ErrorCode::LengthMismatch, "prediction '" + pred.name + "' has " +
                                                 std::to_string(pred.labels.size()) +
                                                 " frames, ground truth has " +
                                                 std::to_string(frames));
    const auto match = match_labels(pred.labels, gt);
    std::vector<int> colour_of(match.mapping.size(), -1);
    for (std::size_t p = 0; p < match.mapping.size(); ++p) {
      if (match.mapping[p] >= 0) {
        colour_of[p] = match.mapping[p];
      } else {
        colour_of[p] = next_free++;
        legend_names.push_back(pred.name + " cluster " + std::to_string(p));
      }
    }
    std::vector<int> ids(frames);
    for (std::size_t i = 0; i < frames; ++i)
      ids[i] = colour_of[pred.labels[i]];
    bars.push_back(std::move(ids));
  }

  const double scale = (kWidth - kLeft - 10.0) / static_cast<double>(frames);
  const double legend_top = kTop + static_cast<double>(bars.size()) * (kBarHeight + kBarGap);
  const double height = legend_top + kLegendRow * static_cast<double>(legend_names.size()) + 10.0;

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  draw_bar(svg, "ground truth", bars[0], kTop, scale);
  for (std::size_t b = 1; b < bars.size(); ++b)
    draw_bar(svg, preds[b - 1].name, bars[b],
             kTop + static_cast<double>(b) * (kBarHeight + kBarGap), scale);

  svg += "  <g class=\"legend\">\n";
  for (std::size_t c = 0; c < legend_names.size(); ++c) {
    const double y = legend_top + kLegendRow * static_cast<double>(c);
    svg += "    <circle cx=\"" + num(kLeft + 6) + "\" cy=\"" + num(y + 6) + "\" r=\"6\" fill=\"" +
           colour(static_cast<int>(c)) + "\"/>\n";
    svg += "    <text x=\"" + num(kLeft + 18) + "\" y=\"" + num(y + 10) + "\">" +
           escape(legend_names[c]) + "</text>\n";
  }
  svg += "  </g>\n</svg>\n";
  return svg;
}

} // namespace tsa
