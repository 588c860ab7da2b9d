#include "cdm/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "cdm/error.hpp"

namespace cdm {

namespace {

// Compensated row sums of |H|, so degrees stay accurate for large graphs.
Vector abs_row_sums(const CMatrix& H) {
  const Index n = H.rows();
  Vector d(n);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0, comp = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double y = std::abs(H(i, j)) - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    d(i) = sum;
  }
  return d;
}

// Clamp roundoff negatives of a PSD spectrum; anything materially negative
// means the decomposition went wrong.
void clamp_psd_spectrum(Vector& values) {
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) < 0.0) {
      require(values(i) >= -1e-9, ErrorCode::NumericalFailure,
              "operator spectrum has a negative eigenvalue beyond roundoff");
      values(i) = 0.0;
    }
  }
}

Matrix symmetrized(const Matrix& D2) {
  const double scale = 1.0 + D2.cwiseAbs().maxCoeff();
  require((D2 - D2.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          ErrorCode::InvalidInput, "squared distance matrix is not symmetric");
  return (D2 + D2.transpose()) / 2.0;
}

}  // namespace

CMatrix gram(const CMatrix& K) {
  require(K.size() > 0, ErrorCode::InvalidInput, "gram: K must be nonempty");
  require(K.allFinite(), ErrorCode::InvalidInput, "gram: K must be finite");
  const Index n = K.cols();
  CMatrix H = CMatrix::Zero(n, n);
  H.selfadjointView<Eigen::Lower>().rankUpdate(K.adjoint());
  for (Index i = 0; i < n; ++i) H(i, i) = Complex(H(i, i).real(), 0.0);
  H.triangularView<Eigen::StrictlyUpper>() =
      H.triangularView<Eigen::StrictlyLower>().transpose().conjugate();
  return H;
}

Vector degree(const CMatrix& H) {
  require(H.rows() == H.cols() && H.rows() > 0, ErrorCode::InvalidInput,
          "degree: H must be square and nonempty");
  Vector d = abs_row_sums(H);
  for (Index i = 0; i < d.size(); ++i)
    require(std::isfinite(d(i)) && d(i) > 0.0, ErrorCode::DegenerateDegree,
            "degree: row " + std::to_string(i) +
                " has nonpositive or nonfinite degree");
  return d;
}

CMatrix normalize(const CMatrix& H, const Vector& d) {
  const Index n = H.rows();
  require(d.size() == n && H.cols() == n, ErrorCode::InvalidInput,
          "normalize: dimension mismatch");
  Vector s(n);
  for (Index i = 0; i < n; ++i) {
    require(std::isfinite(d(i)) && d(i) > 0.0, ErrorCode::DegenerateDegree,
            "normalize: degrees must be positive");
    s(i) = 1.0 / std::sqrt(d(i));
  }
  // Scale pairs once and mirror so the result is Hermitian to the bit.
  CMatrix A(n, n);
  for (Index j = 0; j < n; ++j) {
    A(j, j) = Complex(H(j, j).real() * (s(j) * s(j)), 0.0);
    for (Index i = j + 1; i < n; ++i) {
      const double w = s(i) * s(j);
      A(i, j) = H(i, j) * w;
      A(j, i) = std::conj(A(i, j));
    }
  }
  return A;
}

void fix_phases(CMatrix& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index pivot = 0;
    double best = -1.0;
    for (Index r = 0; r < vectors.rows(); ++r) {
      const double m = std::abs(vectors(r, c));
      if (m > best) {
        best = m;
        pivot = r;
      }
    }
    require(best > 1e-12, ErrorCode::DegeneratePhase,
            "fix_phases: column " + std::to_string(c) +
                " has no entry large enough to anchor a phase");
    const Complex rot = std::conj(vectors(pivot, c)) / best;
    vectors.col(c) *= rot;
    vectors(pivot, c) = Complex(std::abs(vectors(pivot, c)), 0.0);
  }
}

std::pair<Vector, CMatrix> eigh_sorted(const CMatrix& A) {
  require(A.rows() == A.cols() && A.rows() > 0, ErrorCode::InvalidInput,
          "eigh_sorted: A must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(A);
  require(solver.info() == Eigen::Success, ErrorCode::NumericalFailure,
          "eigh_sorted: eigendecomposition did not converge");
  const Index n = A.rows();
  Vector values(n);
  CMatrix vectors(n, n);
  for (Index i = 0; i < n; ++i) {
    values(i) = solver.eigenvalues()(n - 1 - i);
    vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  fix_phases(vectors);
  return {std::move(values), std::move(vectors)};
}

DiffusionModel build_model(const Matrix& X, const KernelParams& params) {
  return build_model_from_sq_distances(pairwise_sq_distances(X), params);
}

DiffusionModel build_model_from_sq_distances(const Matrix& D2,
                                             const KernelParams& params) {
  require(D2.rows() == D2.cols() && D2.rows() > 0, ErrorCode::InvalidInput,
          "build_model: D2 must be square and nonempty");
  require(D2.allFinite() && (D2.array() >= 0.0).all(), ErrorCode::InvalidInput,
          "build_model: D2 must be finite and nonnegative");
  const Matrix D2s = symmetrized(D2);
  CMatrix K = complex_kernel(D2s, params);
  CMatrix H = gram(K);
  Vector d = degree(H);
  CMatrix A = normalize(H, d);
  auto [values, vectors] = eigh_sorted(A);
  clamp_psd_spectrum(values);
  return DiffusionModel{params,         std::move(K),     std::move(d),
                        std::move(A),   std::move(values), std::move(vectors)};
}

CMatrix diffusion_maps(const DiffusionModel& model, double t, Index s) {
  const Index n = model.size();
  require(s >= 1 && s <= n, ErrorCode::InvalidInput,
          "diffusion_maps: s must lie in [1, N]");
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidInput,
          "diffusion_maps: t must be nonnegative");
  CMatrix psi(n, s);
  for (Index c = 0; c < s; ++c)
    psi.col(c) =
        model.eigenvectors.col(c) * std::pow(model.eigenvalues(c), t / 2.0);
  return psi;
}

double diffusion_distance_spectral(const DiffusionModel& model, double t,
                                   Index i, Index j, Index s) {
  const Index n = model.size();
  require(i >= 0 && i < n && j >= 0 && j < n, ErrorCode::InvalidInput,
          "diffusion_distance_spectral: sample index out of range");
  require(s >= 1 && s <= n, ErrorCode::InvalidInput,
          "diffusion_distance_spectral: s must lie in [1, N]");
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidInput,
          "diffusion_distance_spectral: t must be nonnegative");
  double sum = 0.0;
  for (Index c = 0; c < s; ++c) {
    const double w = std::pow(model.eigenvalues(c), t / 2.0);
    sum += std::norm(w * (model.eigenvectors(i, c) - model.eigenvectors(j, c)));
  }
  return std::sqrt(sum);
}

DmModel dm_build_model(const Matrix& X, double sigma) {
  const KernelParams params(sigma, 0.0);
  const Matrix D2 = pairwise_sq_distances(X);
  const Index n = D2.rows();
  Matrix K = (-D2.array() / (sigma * sigma)).exp().matrix();
  Vector d(n);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0, comp = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double y = K(i, j) - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    require(std::isfinite(sum) && sum > 0.0, ErrorCode::DegenerateDegree,
            "dm_build_model: nonpositive degree");
    d(i) = sum;
  }
  Vector s = d.array().rsqrt().matrix();
  Matrix A(n, n);
  for (Index j = 0; j < n; ++j) {
    A(j, j) = K(j, j) * (s(j) * s(j));
    for (Index i = j + 1; i < n; ++i) {
      A(i, j) = K(i, j) * (s(i) * s(j));
      A(j, i) = A(i, j);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A);
  require(solver.info() == Eigen::Success, ErrorCode::NumericalFailure,
          "dm_build_model: eigendecomposition did not converge");
  Vector values(n);
  Matrix vectors(n, n);
  for (Index i = 0; i < n; ++i) {
    values(i) = solver.eigenvalues()(n - 1 - i);
    vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  for (Index c = 0; c < n; ++c) {
    Index pivot = 0;
    double best = -1.0;
    for (Index r = 0; r < n; ++r) {
      const double m = std::abs(vectors(r, c));
      if (m > best) {
        best = m;
        pivot = r;
      }
    }
    if (vectors(pivot, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
  clamp_psd_spectrum(values);
  return DmModel{params.sigma,      std::move(K),     std::move(d),
                 std::move(A),      std::move(values), std::move(vectors)};
}

Matrix dm_maps(const DmModel& model, double t, Index s) {
  const Index n = model.size();
  require(s >= 1 && s <= n, ErrorCode::InvalidInput,
          "dm_maps: s must lie in [1, N]");
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidInput,
          "dm_maps: t must be nonnegative");
  Matrix psi(n, s);
  for (Index c = 0; c < s; ++c)
    psi.col(c) = model.eigenvectors.col(c) * std::pow(model.eigenvalues(c), t);
  return psi;
}

Matrix dm_baseline(const Matrix& X, double sigma, double t, Index s) {
  return dm_maps(dm_build_model(X, sigma), t, s);
}

Matrix pca_baseline(const Matrix& X, Index s) {
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::InvalidInput,
          "pca_baseline: X must be nonempty");
  require(s >= 1 && s <= std::min(X.rows(), X.cols()), ErrorCode::InvalidInput,
          "pca_baseline: s must lie in [1, min(N, d)]");
  Matrix Xc = X.rowwise() - X.colwise().mean();
  Eigen::BDCSVD<Matrix> svd(Xc, Eigen::ComputeThinV);
  require(svd.info() == Eigen::Success, ErrorCode::NumericalFailure,
          "pca_baseline: SVD did not converge");
  Matrix V = svd.matrixV().leftCols(s);
  // Deterministic sign: largest-modulus loading of each direction positive.
  for (Index c = 0; c < s; ++c) {
    Index pivot = 0;
    double best = -1.0;
    for (Index r = 0; r < V.rows(); ++r) {
      const double m = std::abs(V(r, c));
      if (m > best) {
        best = m;
        pivot = r;
      }
    }
    if (V(pivot, c) < 0.0) V.col(c) = -V.col(c);
  }
  return Xc * V;
}

std::pair<double, double> quadratic_form_check(const CMatrix& K,
                                               const CVector& f) {
  require(K.rows() > 0 && K.cols() > 0, ErrorCode::InvalidInput,
          "quadratic_form_check: K must be nonempty");
  require(f.size() == K.cols(), ErrorCode::InvalidInput,
          "quadratic_form_check: f must match the columns of K");
  const CMatrix M = gram(K);
  const Index n = M.rows();
  double lhs = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double m = std::abs(M(i, j));
      require(m > 0.0, ErrorCode::DegeneratePhase,
              "quadratic_form_check: zero inner product, phase undefined");
      lhs += 0.5 * m * std::norm(f(i) - (M(i, j) / m) * f(j));
    }
  }
  const Vector d = abs_row_sums(M);
  const Complex quad = f.dot(d.asDiagonal() * f - M * f);
  return {lhs, quad.real()};
}

}  // namespace cdm
