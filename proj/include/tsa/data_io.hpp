// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsa/error.hpp"

namespace tsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Per-frame feature vectors of one video, one row per frame.
///
/// Construction validates shape (N >= 2, n >= 1) and finiteness, so every
/// FeatureMatrix in flight is usable by the similarity kernels.
class FeatureMatrix {
public:
  explicit FeatureMatrix(Matrix values);

  Eigen::Index frames() const noexcept { return values_.rows(); }
  Eigen::Index dims() const noexcept { return values_.cols(); }
  const Matrix &values() const noexcept { return values_; }

  bool operator==(const FeatureMatrix &other) const { return values_ == other.values_; }

private:
  Matrix values_;
};

/// Per-frame ground-truth or predicted labels, densely numbered.
struct LabelSequence {
  std::vector<int> labels;
  std::vector<std::string> names; ///< names[k] is the token mapped to k
  std::optional<int> background_id;

  std::size_t size() const noexcept { return labels.size(); }
  int classes() const noexcept { return static_cast<int>(names.size()); }
};

enum class FeatureFormat { text, binary };

FeatureFormat parse_feature_format(const std::string &name);

/// Picks binary for `.bin`/`.tsaf` extensions and text otherwise.
FeatureFormat format_from_extension(const std::filesystem::path &path);

FeatureMatrix load_features(const std::filesystem::path &path, FeatureFormat format);
void save_features(const FeatureMatrix &m, const std::filesystem::path &path,
                   FeatureFormat format);

/// In-memory codecs behind load/save; exposed for tests and tools.
FeatureMatrix parse_text_features(const std::string &text);
std::string format_text_features(const FeatureMatrix &m);
/// Text layout for any dense matrix, including shapes a FeatureMatrix rejects.
std::string format_text_matrix(const Matrix &m);
FeatureMatrix parse_binary_features(const std::string &bytes);
std::string format_binary_features(const FeatureMatrix &m);

/// One token per line. Tokens map to [0, K) in first-appearance order.
LabelSequence load_labels(const std::filesystem::path &path,
                          const std::optional<std::string> &background = std::nullopt);
LabelSequence parse_labels(const std::string &text,
                           const std::optional<std::string> &background = std::nullopt);

/// Writes one token per frame. With `names` empty the integer id is written.
void save_labels(const std::vector<int> &labels, const std::filesystem::path &path,
                 const std::vector<std::string> &names = {});

LabelSequence labels_from_ids(const std::vector<int> &ids);

enum class LossOrientation { standard, literal };
enum class SemanticKernel { similarity, distance };
enum class Mixing { learned, temporal_only, semantic_only };
enum class LossSpace { pdf, raw };
enum class Pooling { self_affinity, uniform };
enum class InitScheme { identity, uniform };

/// Hyperparameters of one training run. Field names double as config-file keys.
struct RunConfig {
  int L = 6;
  double h = 1.0;
  int batch_size = 32;
  double learning_rate = 0.051;
  double lr_decay = 0.3;
  double weight_decay = 1e-3;
  double epsilon_stop = 0.032;
  int patience = 2;
  int min_epochs = 2;
  int max_epochs = 50;
  std::uint64_t seed = 0;
  double positive_fraction = 0.05;
  double kl_smoothing = 1e-8;
  LossOrientation loss_orientation = LossOrientation::standard;

  // Ablation and schedule knobs.
  SemanticKernel semantic_kernel = SemanticKernel::similarity;
  Mixing mixing = Mixing::learned;
  LossSpace loss_space = LossSpace::pdf;
  Pooling pooling = Pooling::self_affinity;
  InitScheme init = InitScheme::identity;
  int hidden_layers = 1;
  int hidden_units = 0; ///< 0 means "same as input width"
  int per_anchor = 1;
  int steps_per_epoch = 1;

  /// Throws InvalidArgument naming the first violated constraint.
  void validate() const;
};

/// Apply one `key = value` assignment. Unknown keys throw InvalidArgument.
void set_config_value(RunConfig &config, const std::string &key, const std::string &value);

/// Parse a line-oriented `key = value` file; '#' starts a comment.
RunConfig parse_config(const std::string &text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path &path, RunConfig base = {});

/// Ordered key/value view of every field, defaults included.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig &config);
std::string format_config(const RunConfig &config, const std::string &line_prefix = "");

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &contents);

} // namespace tsa
