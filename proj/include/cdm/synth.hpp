#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cdm/types.hpp"

namespace cdm {

// Generated dataset: one sample per row, integer class labels in [0, K) with
// every class nonempty, plus the seed and a human-readable provenance string
// so any dataset can be regenerated exactly.
struct LabeledDataset {
  Matrix X;
  LabelVector labels;
  std::uint64_t seed = 0;
  std::string provenance;
};

// Raw complex relation matrix of the three-class generator: zero diagonal,
// off-diagonal entries mu_c(j) + eta * (z_ij + i * y_ij).
struct ComplexRelationMatrix {
  CMatrix entries;
  std::array<Complex, 3> means;
  double eta = 0.0;
};

struct ThreeClassData {
  LabeledDataset dataset;          // MDS features + labels
  ComplexRelationMatrix relation;  // complex matrix D
  Matrix blended;                  // symmetric magnitude/phase blend D_final
};

// 3x3 squared-distance matrix of the three-point configuration: points 0 and
// 1 at distance d_near, point 2 at distance d_far from both. Requires
// 0 < d_near < d_far.
Matrix gen_three_point(double d_near, double d_far);

// Three clusters encoded only in a complex relation matrix. Column j carries
// the mean of j's class; rows are noisy observations of it. The blend
//   Dt_ij = alpha * |D_ij| / max|D| + beta * mod(arg D_ij, 2pi) / (2pi)
// is symmetrized into D_final, which classical MDS (double centering, keep
// eigenvalues above 1e-10 * lambda_max, coordinates phi * sqrt(lambda))
// turns into the feature matrix. Labels are 0,1,2 in blocks of n_per.
ThreeClassData gen_three_class(int n_per, double eta, double alpha,
                               double beta, std::uint64_t seed);

// Noisy sinusoid classes: row (c, r) samples sin(2*pi*f_c * k * dt) plus
// N(0, eps^2) noise at k = 0..t_samples-1. Rows are grouped by class.
LabeledDataset gen_noisy_sinusoids(const std::vector<double>& freqs, int n_per,
                                   double eps, int t_samples, double dt,
                                   std::uint64_t seed);

// Delay stacking: output row t is the concatenation of input rows
// t .. t+p-1, giving (T-p+1) x (C*p). p = 1 is the identity.
Matrix stack_order_p(const Matrix& series, int p);

}  // namespace cdm
