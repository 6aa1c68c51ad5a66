// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tsa/data_io.hpp"

namespace tsa {

enum class AffinityKind { semantic, temporal, combined };

/// Square matrix whose rows are probability distributions over frames.
struct AffinityMatrix {
  Matrix rows;
  AffinityKind kind = AffinityKind::semantic;

  Eigen::Index size() const noexcept { return rows.rows(); }
};

/// Decaying weight of temporal distance with its zero crossing at L/2.
struct TemporalKernel {
  int L = 6;
  double beta = 0.0;

  /// beta = -L / (2 ln(1/2)), i.e. the slope that puts weight(L/2) at zero.
  static TemporalKernel from_window(int L);
};

/// Largest |row sum - 1| and smallest entry, for contract checks.
struct PdfCheck {
  double max_row_error = 0.0;
  double min_entry = 0.0;
};
PdfCheck check_pdf_rows(const Matrix &rows);

/// Cosine similarity of every pair of rows. Zero-norm rows throw ZeroNormRow.
Matrix cosine_similarity(const Matrix &features);

/// Row-normalized exp(-(1 - s_ij)/h) with s the cosine similarity
/// (`similarity` kernel), or exp(-s_ij/h) for the literal distance reading.
AffinityMatrix semantic_distribution(const Matrix &features, double h,
                                     SemanticKernel kernel = SemanticKernel::similarity);
inline AffinityMatrix semantic_distribution(const FeatureMatrix &m, double h,
                                            SemanticKernel kernel = SemanticKernel::similarity) {
  return semantic_distribution(m.values(), h, kernel);
}

/// -1 + 2 exp(-d / beta).
double temporal_weight(double d, const TemporalKernel &k);

/// Row-normalized max(0, temporal_weight(|i - j|)).
AffinityMatrix temporal_distribution(Eigen::Index frames, const TemporalKernel &k);

/// Row i = alpha_i * ft_i + (1 - alpha_i) * fs_i, plus `smoothing` on every
/// entry and renormalized, so the result has full support.
AffinityMatrix combine(const AffinityMatrix &fs, const AffinityMatrix &ft, const Vector &alpha,
                       double smoothing);

} // namespace tsa
