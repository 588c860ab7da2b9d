#include "cdm/kernels.hpp"

#include <cmath>

#include "cdm/error.hpp"

namespace cdm {

namespace {
constexpr double kHalfPi = 1.5707963267948966;
}

KernelParams::KernelParams(double sigma_, double theta_)
    : sigma(sigma_), theta(theta_) {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorCode::InvalidInput,
          "KernelParams: sigma must be finite and positive");
  require(std::isfinite(theta) && theta >= -kHalfPi && theta <= 0.0,
          ErrorCode::InvalidInput,
          "KernelParams: theta must lie in [-pi/2, 0]");
}

Complex KernelParams::omega() const {
  return Complex(std::cos(theta), std::sin(theta));
}

Matrix pairwise_sq_distances(const Matrix& X) {
  const Index n = X.rows();
  require(n > 0 && X.cols() > 0, ErrorCode::InvalidInput,
          "pairwise_sq_distances: X must be nonempty");
  require(X.allFinite(), ErrorCode::InvalidInput,
          "pairwise_sq_distances: X must be finite");
  Matrix D2 = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d2 = (X.row(i) - X.row(j)).squaredNorm();
      D2(i, j) = d2;
      D2(j, i) = d2;
    }
  }
  return D2;
}

Matrix cross_sq_distances(const Matrix& A, const Matrix& B) {
  require(A.cols() == B.cols(), ErrorCode::InvalidInput,
          "cross_sq_distances: dimension mismatch");
  require(A.rows() > 0 && B.rows() > 0, ErrorCode::InvalidInput,
          "cross_sq_distances: inputs must be nonempty");
  require(A.allFinite() && B.allFinite(), ErrorCode::InvalidInput,
          "cross_sq_distances: inputs must be finite");
  Matrix D2(A.rows(), B.rows());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < B.rows(); ++j)
      D2(i, j) = (A.row(i) - B.row(j)).squaredNorm();
  return D2;
}

CMatrix complex_kernel(const Matrix& D2, const KernelParams& params) {
  require(D2.size() > 0, ErrorCode::InvalidInput,
          "complex_kernel: D2 must be nonempty");
  require(D2.allFinite() && (D2.array() >= 0.0).all(), ErrorCode::InvalidInput,
          "complex_kernel: D2 must be finite and nonnegative");
  const double inv_s2 = 1.0 / (params.sigma * params.sigma);
  const double c = std::cos(params.theta);
  const double s = std::sin(params.theta);
  CMatrix K(D2.rows(), D2.cols());
  for (Index j = 0; j < D2.cols(); ++j) {
    for (Index i = 0; i < D2.rows(); ++i) {
      const double scaled = D2(i, j) * inv_s2;
      K(i, j) = std::polar(std::exp(-c * scaled), -s * scaled);
    }
  }
  return K;
}

Complex omega_from_ratio(double alpha, double beta) {
  require(std::isfinite(alpha) && std::isfinite(beta) && alpha >= 0.0 &&
              beta >= 0.0 && (alpha > 0.0 || beta > 0.0),
          ErrorCode::InvalidInput,
          "omega_from_ratio: weights must be nonnegative and not both zero");
  const Complex w(alpha, -beta);
  return w / std::abs(w);
}

double theta_from_ratio(double alpha, double beta) {
  return std::arg(omega_from_ratio(alpha, beta));
}

}  // namespace cdm
