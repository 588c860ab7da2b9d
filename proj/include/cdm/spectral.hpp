#pragma once

#include <utility>

#include "cdm/kernels.hpp"
#include "cdm/types.hpp"

namespace cdm {

// Eigenvalues below this floor are treated as numerically zero wherever an
// inverse power of the spectrum is needed.
inline constexpr double kLambdaFloor = 1e-10;

// Result of the averaging-operator construction for one dataset:
//   H = K^* K           (Hermitian, positive semidefinite)
//   d_i = sum_j |H_ij|  (row degrees of the moduli)
//   A = D^{-1/2} H D^{-1/2}
// together with the full spectrum of A. Eigenvalues are real, sorted
// nonincreasing, and lie in [0, 1] up to roundoff; eigenvectors are
// unit-norm columns with a fixed phase convention (the largest-modulus
// entry of each column is rotated to be real positive, ties broken by the
// lowest row index). Small negative eigenvalues above -1e-9 are clamped
// to zero so downstream powers stay real.
struct DiffusionModel {
  KernelParams params;
  CMatrix kernel;        // K, the complex kernel matrix
  Vector degree;         // d
  CMatrix op;            // A
  Vector eigenvalues;    // nonincreasing
  CMatrix eigenvectors;  // columns match eigenvalues

  Index size() const { return eigenvalues.size(); }
};

// K^* K evaluated so the result is exactly Hermitian.
CMatrix gram(const CMatrix& K);

// Row degrees d_i = sum_j |H_ij|. Rejects rows whose degree is not a
// positive finite number, which would make the normalization undefined.
Vector degree(const CMatrix& H);

// D^{-1/2} H D^{-1/2} via symmetric diagonal scaling, preserving
// Hermiticity exactly.
CMatrix normalize(const CMatrix& H, const Vector& d);

// Full Hermitian eigendecomposition, eigenvalues sorted nonincreasing,
// eigenvectors phase-fixed as described on DiffusionModel.
std::pair<Vector, CMatrix> eigh_sorted(const CMatrix& A);

// Rotates each column so its largest-modulus entry is real positive
// (ties broken by lowest row index). Columns whose largest modulus is
// below 1e-12 cannot be fixed and raise DegeneratePhase.
void fix_phases(CMatrix& vectors);

DiffusionModel build_model(const Matrix& X, const KernelParams& params);
DiffusionModel build_model_from_sq_distances(const Matrix& D2,
                                             const KernelParams& params);

// Spectral embedding at diffusion time t: column n of the result is
// lambda_n^{t/2} * phi_n, truncated to the leading s pairs. The first
// (near-constant) coordinate is kept; callers that want to drop it do so
// themselves.
CMatrix diffusion_maps(const DiffusionModel& model, double t, Index s);

// Diffusion distance between samples i and j at time t from the leading s
// spectral pairs: sqrt(sum_n |lambda_n^{t/2} (phi_n(i) - phi_n(j))|^2).
double diffusion_distance_spectral(const DiffusionModel& model, double t,
                                   Index i, Index j, Index s);

// Classical diffusion-maps baseline on the same data: real Gaussian kernel,
// A = D^{-1/2} K D^{-1/2}, embedding columns lambda_n^t * phi_n.
struct DmModel {
  double sigma;
  Matrix kernel;
  Vector degree;
  Matrix op;
  Vector eigenvalues;
  Matrix eigenvectors;  // sign-fixed: largest-modulus entry positive

  Index size() const { return eigenvalues.size(); }
};

DmModel dm_build_model(const Matrix& X, double sigma);
Matrix dm_maps(const DmModel& model, double t, Index s);
Matrix dm_baseline(const Matrix& X, double sigma, double t, Index s);

// PCA baseline: project centered rows of X onto the top s principal
// directions (principal components, not normalized scores).
Matrix pca_baseline(const Matrix& X, Index s);

// Both sides of the graph-energy identity
//   (1/2) sum_ij |M_ij| * |f_i - (M_ij / |M_ij|) f_j|^2 = Re(f^* (D - M) f)
// with M = K^* K. Every inner product must be nonzero (dense kernels), or
// the phase factor is undefined and DegeneratePhase is raised. Returned as
// (lhs, rhs) for external comparison.
std::pair<double, double> quadratic_form_check(const CMatrix& K,
                                               const CVector& f);

}  // namespace cdm
