#pragma once

#include <cstdint>

#include "cdm/types.hpp"

namespace cdm {

// Rows are true classes, columns predicted classes; entries are counts.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
};

// Square confusion matrix over the label range [0, max observed label].
ConfusionMatrix confusion_matrix(const LabelVector& truth,
                                 const LabelVector& pred);

struct KMeansResult {
  LabelVector labels;
  Matrix centroids;  // k x d
  double inertia;
  int iterations;
};

// Lloyd iterations with k-means++ seeding, at most 300 iterations, stopping
// when assignments are stable or the summed squared centroid movement drops
// to 1e-6. A cluster that empties is re-seeded with the point farthest from
// its current centroid. Deterministic given (E, k, seed).
KMeansResult kmeans(const Matrix& E, int k, std::uint64_t seed);

// Interleaves complex columns as [Re c1, Im c1, Re c2, Im c2, ...]; row
// norms are preserved.
Matrix realify(const CMatrix& E);
// Inverse of realify; requires an even column count.
CMatrix complexify(const Matrix& R);

// Maximum-matching accuracy: max over injective relabelings of the predicted
// clusters of the fraction of agreeing samples, solved by optimal assignment
// on the contingency table.
double clustering_accuracy(const LabelVector& truth, const LabelVector& pred);

// Adjusted Rand index, chance-corrected under the hypergeometric
// (fixed-margins) model. Degenerate 0/0 cases mean both partitions are
// trivially identical and return 1.
double ari(const LabelVector& truth, const LabelVector& pred);

// Normalized mutual information I(Y, Yp) / sqrt(H(Y) H(Yp)), natural logs.
// If either entropy is zero: 1 when both partitions are single-cluster,
// otherwise 0.
double nmi(const LabelVector& truth, const LabelVector& pred);

// Trace ratio of between-class to within-class scatter. Zero within-class
// scatter with distinct means is infinite separation and returns +inf.
double fdr(const Matrix& E, const LabelVector& labels);

struct ClassificationReport {
  double accuracy;
  double macro_f1;
  double kappa;
};

// Accuracy, macro-averaged F1 and Cohen's kappa from a confusion matrix.
// Classes with no predictions (or no true samples) get precision (recall) 0;
// with chance agreement 1, kappa is 1 for perfect accuracy and 0 otherwise.
ClassificationReport classification_metrics(const ConfusionMatrix& cm);

// Pearson correlation matrix of the columns of X (T x M). Zero-variance
// columns correlate 0 with everything; the diagonal is forced to 1 and
// entries are clamped to [-1, 1].
Matrix fc(const Matrix& X);

// Mean squared elementwise difference ||FC - FC_G||_F^2 / M^2.
double fc_error(const Matrix& FC, const Matrix& FC_G);
// Pearson correlation across all M^2 elements of the two matrices.
double fc_corr(const Matrix& FC, const Matrix& FC_G);

// Edge cofluctuation series and its cosine-similarity dynamics. Columns of X
// are z-scored (sample std); edge columns enumerate ordered pairs (i, j),
// i != j, row-major, so there are M(M-1) of them. fcd(t, s) is the cosine
// similarity of edge frames t and s.
struct EdgeDynamics {
  Matrix edge_series;  // T x M(M-1)
  Matrix fcd;          // T x T, symmetric, unit diagonal
};

EdgeDynamics edge_dynamics(const Matrix& X);

// Gaussian entropy of the strict upper triangle of an FCD matrix:
// H = log(2 pi sigma^2) / 2 + 1/2 with the population variance sigma^2.
// Zero variance returns -inf.
double ecm_entropy(const Matrix& fcd);

// Pearson correlation between two entropy profiles.
double ecm_corr(const Vector& h_source, const Vector& h_embed);

}  // namespace cdm
