#include "cdm/align.hpp"

#include <Eigen/SVD>

#include "cdm/error.hpp"

namespace cdm {

AlignmentResult procrustes_align(const CMatrix& E_i, const CMatrix& E_ref) {
  require(E_i.rows() == E_ref.rows() && E_i.cols() == E_ref.cols(),
          ErrorCode::InvalidInput, "procrustes_align: shape mismatch");
  require(E_i.size() > 0, ErrorCode::InvalidInput,
          "procrustes_align: inputs must be nonempty");
  const CMatrix M = E_i.adjoint() * E_ref;
  Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  require(svd.info() == Eigen::Success, ErrorCode::NumericalFailure,
          "procrustes_align: SVD did not converge");
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const bool ambiguous = sv(sv.size() - 1) <= 1e-12 * std::max(smax, 1e-300);
  CMatrix O = svd.matrixU() * svd.matrixV().adjoint();
  const double residual = (E_i * O - E_ref).norm();
  return AlignmentResult{std::move(O), residual, ambiguous};
}

}  // namespace cdm
