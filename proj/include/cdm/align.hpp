#pragma once

#include "cdm/types.hpp"

namespace cdm {

// Outcome of a unitary Procrustes alignment of one embedding onto a
// reference. When the cross-covariance E_i^* E_ref is numerically
// rank-deficient the optimal rotation is not unique; the returned one is
// still optimal and deterministic, and `ambiguous` is set as a warning.
struct AlignmentResult {
  CMatrix rotation;   // s x s unitary O
  double residual;    // ||E_i * O - E_ref||_F
  bool ambiguous;
};

// Minimizes ||E_i O - E_ref||_F over unitary O via the SVD of
// E_i^* E_ref = U S V^*, giving O = U V^*. No scaling or translation terms.
AlignmentResult procrustes_align(const CMatrix& E_i, const CMatrix& E_ref);

}  // namespace cdm
