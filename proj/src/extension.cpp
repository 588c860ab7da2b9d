#include "cdm/extension.hpp"

#include <cmath>

#include "cdm/error.hpp"

namespace cdm {

ExtensionOperator cross_affinity(const Matrix& X_new, const Matrix& X_train,
                                 const DiffusionModel& model) {
  require(X_train.rows() == model.size(), ErrorCode::InvalidInput,
          "cross_affinity: X_train does not match the model size");
  const Matrix D2 = cross_sq_distances(X_new, X_train);
  const CMatrix K_G = complex_kernel(D2, model.params);
  CMatrix Kt = K_G.conjugate() * model.kernel;
  const Index n_new = Kt.rows();
  const Index n = Kt.cols();
  for (Index z = 0; z < n_new; ++z) {
    double v = 0.0, comp = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double y = std::abs(Kt(z, j)) - comp;
      const double t = v + y;
      comp = (t - v) - y;
      v = t;
    }
    require(std::isfinite(v) && v > 0.0, ErrorCode::DegenerateDegree,
            "cross_affinity: new point " + std::to_string(z) +
                " has nonpositive degree");
    const double inv_sqrt_v = 1.0 / std::sqrt(v);
    for (Index j = 0; j < n; ++j)
      Kt(z, j) *= inv_sqrt_v / std::sqrt(model.degree(j));
  }
  return ExtensionOperator{std::move(Kt), &model};
}

CMatrix nystrom_embed(const ExtensionOperator& ext, double t, Index s) {
  const DiffusionModel& model = *ext.model;
  require(s >= 1 && s <= model.size(), ErrorCode::InvalidInput,
          "nystrom_embed: s must lie in [1, N]");
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidInput,
          "nystrom_embed: t must be nonnegative");
  Vector scale(s);
  for (Index c = 0; c < s; ++c) {
    const double lambda = model.eigenvalues(c);
    require(lambda > kLambdaFloor, ErrorCode::SpectralUnderflow,
            "nystrom_embed: eigenvalue " + std::to_string(c) +
                " is below the spectral floor");
    scale(c) = std::pow(lambda, t / 2.0 - 1.0);
  }
  CMatrix emb = ext.affinity * model.eigenvectors.leftCols(s);
  for (Index c = 0; c < s; ++c) emb.col(c) *= scale(c);
  return emb;
}

Matrix reconstruct(const ExtensionOperator& ext, double t,
                   const Matrix& X_train, Index modes,
                   bool drop_small_modes) {
  const DiffusionModel& model = *ext.model;
  const Index n = model.size();
  require(X_train.rows() == n, ErrorCode::InvalidInput,
          "reconstruct: X_train does not match the model size");
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidInput,
          "reconstruct: t must be nonnegative");
  require(modes >= 0 && modes <= n, ErrorCode::InvalidInput,
          "reconstruct: modes must lie in [0, N]");
  const Index requested = (modes == 0) ? n : modes;
  Index kept = requested;
  if (drop_small_modes) {
    while (kept > 0 && model.eigenvalues(kept - 1) <= kLambdaFloor) --kept;
    require(kept > 0, ErrorCode::SpectralUnderflow,
            "reconstruct: no eigenvalue above the spectral floor");
  } else {
    require(model.eigenvalues(requested - 1) > kLambdaFloor,
            ErrorCode::SpectralUnderflow,
            "reconstruct: retained eigenvalue below the spectral floor");
  }
  const CMatrix phi = model.eigenvectors.leftCols(kept);
  CMatrix coeffs = phi.adjoint() * X_train.cast<Complex>();
  for (Index c = 0; c < kept; ++c)
    coeffs.row(c) *= std::pow(model.eigenvalues(c), -t / 2.0);
  return ((ext.affinity * phi) * coeffs).real();
}

}  // namespace cdm
