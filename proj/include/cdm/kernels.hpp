#pragma once

#include "cdm/types.hpp"

namespace cdm {

// Parameters of the complex Gaussian kernel
//   k(x, y) = exp(-omega * ||x - y||^2 / sigma^2),  omega = exp(i * theta).
// theta is the canonical parameter; omega is always derived from it. theta = 0
// recovers the real Gaussian kernel, theta = -pi/2 gives the unit-modulus
// (purely oscillatory) kernel. Angles outside [-pi/2, 0] would break the
// positivity of the averaging operator and are rejected.
struct KernelParams {
  double sigma;
  double theta;

  KernelParams(double sigma_, double theta_);
  Complex omega() const;
};

// Squared Euclidean distance matrix of the rows of X. Each pair is computed
// once and mirrored, so the result is exactly symmetric with a zero diagonal.
Matrix pairwise_sq_distances(const Matrix& X);

// Cross squared distances between the rows of A (rows of the result) and the
// rows of B (columns).
Matrix cross_sq_distances(const Matrix& A, const Matrix& B);

// Elementwise complex kernel exp(-omega * D2 / sigma^2). D2 must be
// nonnegative; entries have modulus exp(-cos(theta) * D2 / sigma^2) and
// nonnegative phase -sin(theta) * D2 / sigma^2.
CMatrix complex_kernel(const Matrix& D2, const KernelParams& params);

// Unit-modulus direction of the complex weight alpha - i * beta used when a
// magnitude/phase blend is folded into a single kernel angle. Requires
// alpha >= 0, beta >= 0, not both zero, so the angle lands in [-pi/2, 0].
Complex omega_from_ratio(double alpha, double beta);

// arg(omega_from_ratio(alpha, beta)), convenient when a KernelParams is
// being built from blend weights.
double theta_from_ratio(double alpha, double beta);

}  // namespace cdm
