// SPDX-License-Identifier: Apache-2.0
#include "tsa/model.hpp"

#include <cmath>

namespace tsa {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ForwardCache {
  std::vector<Matrix> pre;  ///< pre-activation of each hidden layer
  std::vector<Matrix> post; ///< input to each layer (post[0] = X)
  Matrix Z;
};

ForwardCache forward_cached(const TsaModel &model, const Matrix &X) {
  ForwardCache cache;
  cache.post.push_back(X);
  const auto hidden = model.layers.size() - 1;
  for (std::size_t l = 0; l < hidden; ++l) {
    const auto &layer = model.layers[l];
    Matrix h = cache.post.back() * layer.weight.transpose();
    h.rowwise() += layer.bias.transpose();
    cache.post.push_back(h.cwiseMax(0.0));
    cache.pre.push_back(std::move(h));
  }
  const auto &out = model.layers.back();
  cache.Z = cache.post.back() * out.weight.transpose();
  cache.Z.rowwise() += out.bias.transpose();
  return cache;
}

/// Backpropagate dL/dZ through the MLP into `grads.layers`.
void backprop_mlp(const TsaModel &model, const ForwardCache &cache, Matrix dZ, Gradients &grads) {
  const auto count = model.layers.size();
  grads.layers.resize(count);
  Matrix upstream = std::move(dZ);
  for (std::size_t k = count; k-- > 0;) {
    const auto &input = cache.post[k];
    grads.layers[k].weight = upstream.transpose() * input;
    grads.layers[k].bias = upstream.colwise().sum().transpose();
    if (k == 0)
      break;
    Matrix d_input = upstream * model.layers[k].weight;
    d_input.array() *= (cache.pre[k - 1].array() > 0.0).cast<double>();
    upstream = std::move(d_input);
  }
}

Vector mixing_weights(const TsaModel &model) { return model.alpha(); }

void check_triplets(const std::vector<Triplet> &triplets, Index frames) {
  if (triplets.empty())
    throw Error(ErrorCode::EmptyTriplets, "loss needs at least one triplet");
  for (const auto &t : triplets)
    if (t.anchor < 0 || t.anchor >= frames || t.positive < 0 || t.positive >= frames ||
        t.negative < 0 || t.negative >= frames)
      throw Error(ErrorCode::InvalidArgument, "triplet index out of range");
}

LossAndGradient raw_backward(const TsaModel &model, const ForwardCache &cache,
                             const std::vector<Triplet> &triplets, LossOrientation orientation) {
  const Matrix &Z = cache.Z;
  const double sign = orientation == LossOrientation::standard ? 1.0 : -1.0;
  const double scale = 1.0 / static_cast<double>(triplets.size());
  LossAndGradient out;
  Matrix dZ = Matrix::Zero(Z.rows(), Z.cols());
  for (const auto &t : triplets) {
    const Eigen::RowVectorXd to_pos = Z.row(t.anchor) - Z.row(t.positive);
    const Eigen::RowVectorXd to_neg = Z.row(t.anchor) - Z.row(t.negative);
    const double margin = sign * (to_pos.squaredNorm() - to_neg.squaredNorm());
    if (margin <= 0.0)
      continue;
    out.loss += margin * scale;
    ++out.active_terms;
    const double g = 2.0 * sign * scale;
    dZ.row(t.anchor) += g * (to_pos - to_neg);
    dZ.row(t.positive) -= g * to_pos;
    dZ.row(t.negative) += g * to_neg;
  }
  backprop_mlp(model, cache, std::move(dZ), out.grads);
  out.grads.a_raw = Vector::Zero(model.a_raw.size());
  return out;
}

} // namespace

Vector TsaModel::alpha() const {
  switch (mixing) {
  case Mixing::temporal_only: return Vector::Ones(a_raw.size());
  case Mixing::semantic_only: return Vector::Zero(a_raw.size());
  case Mixing::learned: break;
  }
  return a_raw.unaryExpr([](double x) { return logistic(x); });
}

Vector TsaModel::flatten() const {
  Index total = a_raw.size();
  for (const auto &l : layers)
    total += l.weight.size() + l.bias.size();
  Vector out(total);
  Index at = 0;
  for (const auto &l : layers) {
    out.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    out.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  out.segment(at, a_raw.size()) = a_raw;
  return out;
}

void TsaModel::unflatten(const Vector &params) {
  Index at = 0;
  for (auto &l : layers) {
    l.weight.reshaped() = params.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = params.segment(at, l.bias.size());
    at += l.bias.size();
  }
  a_raw = params.segment(at, a_raw.size());
}

bool TsaModel::all_finite() const {
  for (const auto &l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite())
      return false;
  return a_raw.allFinite();
}

Vector Gradients::flatten() const {
  TsaModel shape;
  shape.layers = layers;
  shape.a_raw = a_raw;
  return shape.flatten();
}

TsaModel init_model(const Matrix &X, const RunConfig &config, Rng &rng) {
  const Index dims = X.cols();
  const Index hidden = config.hidden_units > 0 ? config.hidden_units : dims;
  if (config.init == InitScheme::identity && hidden < dims)
    throw Error(ErrorCode::InvalidArgument,
                "identity init needs at least as many hidden units as input dims");
  TsaModel model;
  model.mixing = config.mixing;
  // Identity init shifts the input into the ReLU's linear range and back out.
  const double offset = X.size() ? X.cwiseAbs().maxCoeff() + 1.0 : 1.0;
  Index fan_in = dims;
  for (int l = 0; l <= config.hidden_layers; ++l) {
    const bool output = l == config.hidden_layers;
    const Index out = output ? dims : hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer{Matrix(out, fan_in), Vector::Zero(out)};
    // Column-major fill order is part of the seeded contract.
    for (Index j = 0; j < fan_in; ++j)
      for (Index i = 0; i < out; ++i)
        layer.weight(i, j) = rng.uniform(-bound, bound);
    if (config.init == InitScheme::identity) {
      if (l == 0) {
        // Units beyond the input width keep their random rows.
        layer.weight.topRows(dims).setIdentity();
        layer.bias.head(dims).setConstant(offset);
      } else if (!output) {
        layer.weight.setIdentity();
      } else {
        layer.weight.setZero();
        layer.weight.leftCols(dims).setIdentity();
        layer.bias.setConstant(-offset);
      }
    }
    model.layers.push_back(std::move(layer));
    fan_in = out;
  }
  model.a_raw = Vector::Zero(X.rows());
  return model;
}

Matrix forward(const TsaModel &model, const Matrix &X) {
  if (X.cols() != model.input_dims())
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(model.input_dims()) + " input dims, got " +
                    std::to_string(X.cols()));
  return forward_cached(model, X).Z;
}

FeatureMatrix forward(const TsaModel &model, const FeatureMatrix &X) {
  return FeatureMatrix(forward(model, X.values()));
}

double kl_divergence(const Eigen::Ref<const Eigen::RowVectorXd> &p,
                     const Eigen::Ref<const Eigen::RowVectorXd> &q) {
  if (p.size() != q.size())
    throw Error(ErrorCode::DimensionMismatch, "KL operands differ in length");
  double total = 0.0;
  for (Index k = 0; k < p.size(); ++k) {
    if (!(p(k) > 0.0) || !(q(k) > 0.0))
      throw Error(ErrorCode::NonPositiveEntry,
                  "KL needs strictly positive entries (index " + std::to_string(k) + ")");
    total += p(k) * (std::log(p(k)) - std::log(q(k)));
  }
  return std::max(0.0, total);
}

double triplet_loss(const AffinityMatrix &f_ts, const std::vector<Triplet> &triplets,
                    LossOrientation orientation) {
  check_triplets(triplets, f_ts.size());
  double total = 0.0;
  for (const auto &t : triplets) {
    const double to_pos = kl_divergence(f_ts.rows.row(t.anchor), f_ts.rows.row(t.positive));
    const double to_neg = kl_divergence(f_ts.rows.row(t.anchor), f_ts.rows.row(t.negative));
    const double margin = orientation == LossOrientation::standard ? to_pos - to_neg
                                                                   : to_neg - to_pos;
    total += std::max(0.0, margin);
  }
  return total / static_cast<double>(triplets.size());
}

double raw_triplet_loss(const Matrix &Z, const std::vector<Triplet> &triplets,
                        LossOrientation orientation) {
  check_triplets(triplets, Z.rows());
  double total = 0.0;
  for (const auto &t : triplets) {
    const double to_pos = (Z.row(t.anchor) - Z.row(t.positive)).squaredNorm();
    const double to_neg = (Z.row(t.anchor) - Z.row(t.negative)).squaredNorm();
    const double margin = orientation == LossOrientation::standard ? to_pos - to_neg
                                                                   : to_neg - to_pos;
    total += std::max(0.0, margin);
  }
  return total / static_cast<double>(triplets.size());
}

AffinityMatrix learned_affinity(const TsaModel &model, const Matrix &X, const AffinityMatrix &ft,
                                const RunConfig &config) {
  const Matrix Z = forward(model, X);
  return combine(semantic_distribution(Z, config.h, config.semantic_kernel), ft,
                 mixing_weights(model), config.kl_smoothing);
}

double loss_value(const TsaModel &model, const Matrix &X, const std::vector<Triplet> &triplets,
                  const RunConfig &config) {
  if (config.loss_space == LossSpace::raw)
    return raw_triplet_loss(forward(model, X), triplets, config.loss_orientation);
  const auto ft = temporal_distribution(X.rows(), TemporalKernel::from_window(config.L));
  return triplet_loss(learned_affinity(model, X, ft, config), triplets, config.loss_orientation);
}

LossAndGradient backward(const TsaModel &model, const Matrix &X,
                         const std::vector<Triplet> &triplets, const RunConfig &config) {
  if (X.cols() != model.input_dims())
    throw Error(ErrorCode::DimensionMismatch, "model/input width mismatch");
  if (model.a_raw.size() != X.rows())
    throw Error(ErrorCode::DimensionMismatch, "mixing vector length differs from frame count");
  check_triplets(triplets, X.rows());
  const auto cache = forward_cached(model, X);
  if (config.loss_space == LossSpace::raw)
    return raw_backward(model, cache, triplets, config.loss_orientation);

  const Index n = X.rows();
  const Matrix &Z = cache.Z;

  // Semantic kernel on unit-normalized rows of Z.
  Vector norms = Z.rowwise().norm();
  for (Index i = 0; i < n; ++i)
    if (!(norms(i) > 0.0))
      throw Error(ErrorCode::ZeroNormRow,
                  "learned feature of frame " + std::to_string(i) + " collapsed to zero");
  const Matrix U = norms.cwiseInverse().asDiagonal() * Z;
  const Matrix S = U * U.transpose();
  const bool similarity = config.semantic_kernel == SemanticKernel::similarity;
  const Matrix W =
      similarity ? Matrix((-(1.0 - S.array()) / config.h).exp()) : Matrix((-S.array() / config.h).exp());
  const Vector w_sum = W.rowwise().sum();
  const Matrix fs = w_sum.cwiseInverse().asDiagonal() * W;

  const auto ft = temporal_distribution(n, TemporalKernel::from_window(config.L));
  const Vector alpha = mixing_weights(model);
  Matrix C(n, n);
  for (Index i = 0; i < n; ++i)
    C.row(i) = alpha(i) * ft.rows.row(i) + (1.0 - alpha(i)) * fs.row(i);
  const Matrix smoothed = C.array() + config.kl_smoothing;
  const Vector c_sum = smoothed.rowwise().sum();
  const Matrix P = c_sum.cwiseInverse().asDiagonal() * smoothed;
  const Matrix logP = P.array().log();

  // dL/dP, touching only anchor, positive and negative rows.
  const double sign = config.loss_orientation == LossOrientation::standard ? 1.0 : -1.0;
  const double scale = 1.0 / static_cast<double>(triplets.size());
  LossAndGradient out;
  Matrix dP = Matrix::Zero(n, n);
  for (const auto &t : triplets) {
    const auto a = P.row(t.anchor);
    const double to_pos = (a.array() * (logP.row(t.anchor) - logP.row(t.positive)).array()).sum();
    const double to_neg = (a.array() * (logP.row(t.anchor) - logP.row(t.negative)).array()).sum();
    const double margin = sign * (to_pos - to_neg);
    if (margin <= 0.0)
      continue;
    out.loss += margin * scale;
    ++out.active_terms;
    const double g = sign * scale;
    // d/dP_a [KL(a||p) - KL(a||n)] = log P_n - log P_p (the +1 terms cancel).
    dP.row(t.anchor) += g * (logP.row(t.negative) - logP.row(t.positive));
    dP.row(t.positive) -= g * (a.array() / P.row(t.positive).array()).matrix();
    dP.row(t.negative) += g * (a.array() / P.row(t.negative).array()).matrix();
  }

  if (out.active_terms == 0) {
    out.grads.layers.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l)
      out.grads.layers[l] = {Matrix::Zero(model.layers[l].weight.rows(), model.layers[l].weight.cols()),
                             Vector::Zero(model.layers[l].bias.size())};
    out.grads.a_raw = Vector::Zero(n);
    return out;
  }

  // Through the smoothing renormalization.
  Matrix dC(n, n);
  for (Index i = 0; i < n; ++i) {
    const double inner = dP.row(i).dot(P.row(i));
    dC.row(i) = (dP.row(i).array() - inner) / c_sum(i);
  }

  // Through the mixture.
  out.grads.a_raw = Vector::Zero(n);
  Matrix dfs(n, n);
  for (Index i = 0; i < n; ++i) {
    if (model.mixing == Mixing::learned) {
      const double d_alpha = dC.row(i).dot(ft.rows.row(i) - fs.row(i));
      out.grads.a_raw(i) = d_alpha * alpha(i) * (1.0 - alpha(i));
    }
    dfs.row(i) = (1.0 - alpha(i)) * dC.row(i);
  }

  // Through the semantic row normalization and the kernel.
  Matrix dS(n, n);
  for (Index i = 0; i < n; ++i) {
    const double inner = dfs.row(i).dot(fs.row(i));
    dS.row(i) = ((dfs.row(i).array() - inner) / w_sum(i)) * W.row(i).array() *
                ((similarity ? 1.0 : -1.0) / config.h);
  }

  // Through cosine similarity and the row normalization of Z.
  const Matrix dU = (dS + dS.transpose()) * U;
  Matrix dZ(n, Z.cols());
  for (Index i = 0; i < n; ++i)
    dZ.row(i) = (dU.row(i) - U.row(i).dot(dU.row(i)) * U.row(i)) / norms(i);

  backprop_mlp(model, cache, std::move(dZ), out.grads);
  return out;
}

void apply_step(TsaModel &model, const Gradients &grads, double lr, double weight_decay) {
  const double shrink = 1.0 - lr * 2.0 * weight_decay;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    model.layers[l].weight = shrink * model.layers[l].weight - lr * grads.layers[l].weight;
    model.layers[l].bias = shrink * model.layers[l].bias - lr * grads.layers[l].bias;
  }
  if (model.mixing == Mixing::learned)
    model.a_raw = shrink * model.a_raw - lr * grads.a_raw;
}

const char *to_string(StopReason reason) noexcept {
  switch (reason) {
  case StopReason::max_epochs: return "max_epochs";
  case StopReason::converged: return "converged";
  case StopReason::diverged: return "diverged";
  }
  return "unknown";
}

TrainResult train(const FeatureMatrix &X, const RunConfig &config,
                  const std::function<void(const EpochReport &)> &on_epoch) {
  config.validate();
  const Index frames = X.frames();
  TrainState state;
  state.rng = Rng(config.seed);
  state.lr = config.learning_rate;
  TsaModel model = init_model(X.values(), config, state.rng);

  const auto ft = temporal_distribution(frames, TemporalKernel::from_window(config.L));
  const Index batch = std::min<Index>(config.batch_size, frames);

  TsaModel before_step = model;
  while (state.epoch < config.max_epochs) {
    AffinityMatrix f_ts;
    try {
      f_ts = learned_affinity(model, X.values(), ft, config);
      if (!f_ts.rows.allFinite())
        throw Error(ErrorCode::NonFiniteGradient, "learned affinity is not finite");
    } catch (const Error &e) {
      // A collapsed or overflowing representation after a step is a failed descent.
      if (state.epoch == 0 ||
          (e.code() != ErrorCode::ZeroNormRow && e.code() != ErrorCode::NonFiniteGradient))
        throw;
      model = before_step;
      state.stop = StopReason::diverged;
      break;
    }
    const auto anchors = stochastic_pool(f_ts, batch, state.rng, config.pooling);
    const auto triplets =
        sample_triplets(f_ts, anchors, config.per_anchor, state.rng, config.positive_fraction);
    if (triplets.empty())
      throw Error(ErrorCode::EmptyTriplets,
                  "no admissible (positive, negative) pair for any anchor; N=" +
                      std::to_string(frames));

    const TsaModel last_good = model;
    before_step = model;
    double epoch_loss = 0.0;
    bool diverged = false;
    for (int step = 0; step < config.steps_per_epoch; ++step) {
      auto lg = backward(model, X.values(), triplets, config);
      if (!std::isfinite(lg.loss) || !lg.grads.flatten().allFinite()) {
        diverged = true;
        break;
      }
      epoch_loss += lg.loss;
      apply_step(model, lg.grads, state.lr, config.weight_decay);
      if (!model.all_finite()) {
        diverged = true;
        break;
      }
    }
    if (diverged) {
      model = last_good;
      state.stop = StopReason::diverged;
      break;
    }
    epoch_loss /= static_cast<double>(config.steps_per_epoch);
    state.loss_history.push_back(epoch_loss);
    ++state.epoch;
    if (on_epoch)
      on_epoch({state.epoch, epoch_loss, state.lr, &triplets});
    state.lr *= config.lr_decay;

    // An epoch with no active hinge counts as stalled on its own.
    const auto &h = state.loss_history;
    const bool stalled =
        epoch_loss == 0.0 ||
        (h.size() >= 2 && std::abs(h[h.size() - 1] - h[h.size() - 2]) < config.epsilon_stop);
    state.bad_steps = stalled ? state.bad_steps + 1 : 0;
    if (state.epoch >= config.min_epochs && state.bad_steps >= config.patience) {
      state.stop = StopReason::converged;
      break;
    }
  }

  Matrix Z = forward(model, X.values());
  return {std::move(model), std::move(Z), std::move(state)};
}

} // namespace tsa
