// SPDX-License-Identifier: Apache-2.0
#include "tsa/similarity.hpp"

#include <cmath>
#include <numbers>

namespace tsa {

namespace {

void normalize_rows(Matrix &m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      sum += m(i, j);
    m.row(i) /= sum;
  }
}

} // namespace

TemporalKernel TemporalKernel::from_window(int L) {
  if (L < 1)
    throw Error(ErrorCode::InvalidArgument, "temporal window L must be positive");
  return TemporalKernel{L, -static_cast<double>(L) / (2.0 * std::log(0.5))};
}

PdfCheck check_pdf_rows(const Matrix &rows) {
  PdfCheck out;
  out.min_entry = rows.size() ? rows.minCoeff() : 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    out.max_row_error = std::max(out.max_row_error, std::abs(rows.row(i).sum() - 1.0));
  return out;
}

Matrix cosine_similarity(const Matrix &features) {
  Matrix unit = features;
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double norm = unit.row(i).norm();
    if (!(norm > 0.0))
      throw Error(ErrorCode::ZeroNormRow,
                  "frame " + std::to_string(i) + " has a zero-norm feature vector");
    unit.row(i) /= norm;
  }
  return unit * unit.transpose();
}

AffinityMatrix semantic_distribution(const Matrix &features, double h, SemanticKernel kernel) {
  if (!(h > 0.0))
    throw Error(ErrorCode::InvalidArgument, "semantic bandwidth h must be positive");
  const Matrix sim = cosine_similarity(features);
  Matrix w(sim.rows(), sim.cols());
  // Only the kernel exponent differs between the two readings; both keep the diagonal.
  if (kernel == SemanticKernel::similarity)
    w = (-(1.0 - sim.array()) / h).exp().matrix();
  else
    w = (-sim.array() / h).exp().matrix();
  normalize_rows(w);
  return {std::move(w), AffinityKind::semantic};
}

double temporal_weight(double d, const TemporalKernel &k) {
  return -1.0 + 2.0 * std::exp(-d / k.beta);
}

AffinityMatrix temporal_distribution(Eigen::Index frames, const TemporalKernel &k) {
  if (frames < 2)
    throw Error(ErrorCode::InvalidArgument, "temporal distribution needs N >= 2");
  // Weights depend only on |i - j|, so tabulate them once.
  Vector by_distance(frames);
  for (Eigen::Index d = 0; d < frames; ++d)
    by_distance(d) = std::max(0.0, temporal_weight(static_cast<double>(d), k));
  Matrix w(frames, frames);
  for (Eigen::Index i = 0; i < frames; ++i)
    for (Eigen::Index j = 0; j < frames; ++j)
      w(i, j) = by_distance(std::abs(i - j));
  normalize_rows(w);
  return {std::move(w), AffinityKind::temporal};
}

AffinityMatrix combine(const AffinityMatrix &fs, const AffinityMatrix &ft, const Vector &alpha,
                       double smoothing) {
  const auto n = fs.size();
  if (ft.size() != n || alpha.size() != n || fs.rows.cols() != n || ft.rows.cols() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "combine expects N x N semantic/temporal rows and N mixing weights (fs " +
                    std::to_string(fs.size()) + ", ft " + std::to_string(ft.size()) +
                    ", alpha " + std::to_string(alpha.size()) + ")");
  if (!(smoothing > 0.0))
    throw Error(ErrorCode::InvalidArgument, "smoothing must be positive");
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = alpha(i);
    if (!(a >= 0.0 && a <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "alpha(" + std::to_string(i) + ") outside [0, 1]");
    out.row(i) = a * ft.rows.row(i) + (1.0 - a) * fs.rows.row(i);
    out.row(i).array() += smoothing;
  }
  normalize_rows(out);
  return {std::move(out), AffinityKind::combined};
}

} // namespace tsa
