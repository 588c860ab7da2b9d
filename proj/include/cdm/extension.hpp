#pragma once

#include "cdm/spectral.hpp"
#include "cdm/types.hpp"

namespace cdm {

// Normalized cross-affinity between a batch of new points and the training
// set of an existing model. Rows index new points, columns training points.
// The referenced model must outlive the operator.
struct ExtensionOperator {
  CMatrix affinity;  // A_G, N_G x N
  const DiffusionModel* model;
};

// Builds A_G for new points:
//   K_G[z][i]   = k(x_z, x_i)                    (training kernel params)
//   Kt_G        = conj(K_G) * K_train
//   A_G[z][j]   = Kt_G[z][j] / (sqrt(v_z) * sqrt(d_j)),  v_z = sum_j |Kt_G[z][j]|
// The new-point degree v_z sums over training columns only, so feeding the
// training points back in reproduces the training operator A.
ExtensionOperator cross_affinity(const Matrix& X_new, const Matrix& X_train,
                                 const DiffusionModel& model);

// Out-of-sample embedding at diffusion time t from the leading s spectral
// pairs: Phi_G^t = A_G * Phi_s * Lambda_s^{t/2 - 1}. At t = 1 this is the
// classical Nystrom extension A_G Phi Lambda^{-1/2}; other t rescale columns
// so in-sample rows match diffusion_maps (A Phi = Phi Lambda). Eigenvalues
// at or below kLambdaFloor cannot be inverted and raise SpectralUnderflow.
CMatrix nystrom_embed(const ExtensionOperator& ext, double t, Index s);

// Lifts embeddings back to data space:
//   X_G = Real(A_G * Phi * Lambda^{-t/2} * Phi^* * X_train)
// using the leading `modes` spectral pairs (0 means the full spectrum).
// In-sample with the full spectrum and t = 2 this is the identity. With
// drop_small_modes, eigenvalues at or below kLambdaFloor are excluded from
// the inverse power instead of raising SpectralUnderflow.
Matrix reconstruct(const ExtensionOperator& ext, double t,
                   const Matrix& X_train, Index modes = 0,
                   bool drop_small_modes = false);

}  // namespace cdm
