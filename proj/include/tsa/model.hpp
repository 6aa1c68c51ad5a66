// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "tsa/triplet.hpp"

namespace tsa {

struct DenseLayer {
  Matrix weight; ///< out x in
  Vector bias;   ///< out
};

/// The learned map phi plus the per-frame mixing logits.
///
/// `layers` holds the ReLU hidden layers followed by one linear output layer;
/// the default shape is W1, b1 (hidden) and W2, b2 (output). alpha is
/// logistic(a_raw) unless the mixing mode pins it to 0 or 1.
struct TsaModel {
  std::vector<DenseLayer> layers;
  Vector a_raw;
  Mixing mixing = Mixing::learned;

  Index input_dims() const { return layers.front().weight.cols(); }
  Index output_dims() const { return layers.back().weight.rows(); }
  Vector alpha() const;
  /// Concatenation of every parameter (layers in order, then a_raw).
  Vector flatten() const;
  void unflatten(const Vector &params);
  bool all_finite() const;
};

struct Gradients {
  std::vector<DenseLayer> layers;
  Vector a_raw;

  Vector flatten() const;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradients grads;
  std::size_t active_terms = 0;
};

/// a_raw = 0 (alpha = 1/2) in both schemes. `uniform`: weights from
/// U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases. `identity`: phi(X) = X
/// exactly, with the input shifted by max|X| + 1 through the ReLU range;
/// hidden units beyond the input width keep uniform rows.
TsaModel init_model(const Matrix &X, const RunConfig &config, Rng &rng);

/// Z = W2 relu(W1 x + b1) + b2, row by row.
Matrix forward(const TsaModel &model, const Matrix &X);
FeatureMatrix forward(const TsaModel &model, const FeatureMatrix &X);

/// sum_k p_k ln(p_k / q_k). Throws NonPositiveEntry unless both are strictly positive.
double kl_divergence(const Eigen::Ref<const Eigen::RowVectorXd> &p,
                     const Eigen::Ref<const Eigen::RowVectorXd> &q);

/// Mean hinge over triplets. `standard`: max(0, KL(i||i+) - KL(i||i-));
/// `literal`: max(0, KL(i||i-) - KL(i||i+)).
double triplet_loss(const AffinityMatrix &f_ts, const std::vector<Triplet> &triplets,
                    LossOrientation orientation);

/// Same hinge on squared Euclidean distances between rows of Z (the
/// "no similarity PDF" ablation).
double raw_triplet_loss(const Matrix &Z, const std::vector<Triplet> &triplets,
                        LossOrientation orientation);

/// f_ts of the current learned features: combine(semantic(phi(X)), f_t, alpha).
AffinityMatrix learned_affinity(const TsaModel &model, const Matrix &X, const AffinityMatrix &ft,
                                const RunConfig &config);

/// Loss for fixed triplets, differentiated end to end through phi, the
/// semantic kernel and the mixing step. Weight decay is not included.
LossAndGradient backward(const TsaModel &model, const Matrix &X,
                         const std::vector<Triplet> &triplets, const RunConfig &config);
double loss_value(const TsaModel &model, const Matrix &X, const std::vector<Triplet> &triplets,
                  const RunConfig &config);

/// theta <- theta - lr * (grad + 2 * weight_decay * theta) on every parameter.
void apply_step(TsaModel &model, const Gradients &grads, double lr, double weight_decay);

enum class StopReason { max_epochs, converged, diverged };

struct TrainState {
  int epoch = 0;
  std::vector<double> loss_history;
  double lr = 0.0;
  int bad_steps = 0;
  Rng rng;
  StopReason stop = StopReason::max_epochs;
};

struct EpochReport {
  int epoch = 0; ///< 1-based
  double loss = 0.0;
  double lr = 0.0;
  const std::vector<Triplet> *triplets = nullptr;
};

struct TrainResult {
  TsaModel model;
  Matrix Z;
  TrainState state;
};

/// Epoch loop: rebuild f_ts from the current Z, pool anchors, pick triplets,
/// descend. The learning rate decays as lr0 * lr_decay^(epoch - 1).
TrainResult train(const FeatureMatrix &X, const RunConfig &config,
                  const std::function<void(const EpochReport &)> &on_epoch = {});

const char *to_string(StopReason reason) noexcept;

} // namespace tsa
