#include "cdm/extension.hpp"

#include <cmath>

#include "cdm/error.hpp"
#include "cdm/rng.hpp"
#include "doctest.h"

using namespace cdm;

namespace {
constexpr double kPi = 3.141592653589793;

Matrix random_points(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) X(i, j) = rng.normal();
  return X;
}

Complex kernel_scalar(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b,
                      const KernelParams& p) {
  const double scaled = (a - b).squaredNorm() / (p.sigma * p.sigma);
  return std::polar(std::exp(-std::cos(p.theta) * scaled),
                    -std::sin(p.theta) * scaled);
}

// Largest s whose eigenvalues stay comfortably invertible.
Index safe_modes(const DiffusionModel& model, Index cap) {
  Index s = 0;
  while (s < cap && model.eigenvalues(s) > 1e-6) ++s;
  return s;
}
}  // namespace

TEST_CASE("in-sample affinity reproduces the training operator") {
  const Matrix X = random_points(12, 3, 3);
  const auto model = build_model(X, KernelParams(1.1, -kPi / 4));
  const auto ext = cross_affinity(X, X, model);
  CHECK((ext.affinity - model.op).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("a coincident new point reproduces the matching operator row") {
  const Matrix X = random_points(10, 2, 8);
  const auto model = build_model(X, KernelParams(0.9, -kPi / 8));
  const Matrix X_new = X.row(4);
  const auto ext = cross_affinity(X_new, X, model);
  CHECK((ext.affinity.row(0) - model.op.row(4)).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("cross affinity matches the elementwise defining sums") {
  const KernelParams params(1.3, -kPi / 3);
  const Matrix X = random_points(10, 3, 19);
  const auto model = build_model(X, params);
  const Matrix Z = random_points(4, 3, 20);
  const auto ext = cross_affinity(Z, X, model);
  const Index n = X.rows();
  for (Index z = 0; z < Z.rows(); ++z) {
    CVector kt(n);
    for (Index j = 0; j < n; ++j) {
      Complex sum = 0.0;
      for (Index i = 0; i < n; ++i)
        sum += std::conj(kernel_scalar(Z.row(z), X.row(i), params)) *
               kernel_scalar(X.row(j), X.row(i), params);
      kt(j) = sum;
    }
    double v = 0.0;
    for (Index j = 0; j < n; ++j) v += std::abs(kt(j));
    for (Index j = 0; j < n; ++j) {
      const Complex want = kt(j) / (std::sqrt(v) * std::sqrt(model.degree(j)));
      CHECK(std::abs(ext.affinity(z, j) - want) <= 1e-10);
    }
  }
}

TEST_CASE("in-sample extension reproduces diffusion maps for all t") {
  for (std::uint64_t seed : {6ull, 7ull}) {
    const Matrix X = random_points(14, 4, seed);
    const auto model = build_model(X, KernelParams(1.5, -kPi / 4));
    const Index s = safe_modes(model, 6);
    REQUIRE(s >= 2);
    const auto ext = cross_affinity(X, X, model);
    for (double t : {0.0, 1.0, 2.0, 4.0}) {
      const CMatrix direct = diffusion_maps(model, t, s);
      const CMatrix extended = nystrom_embed(ext, t, s);
      CHECK((extended - direct).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("held-out extension matches the direct spectral sums") {
  const KernelParams params(1.4, -kPi / 6);
  const Matrix X = random_points(12, 3, 23);
  const auto model = build_model(X, params);
  const Matrix Z = random_points(3, 3, 24);
  const auto ext = cross_affinity(Z, X, model);
  const Index s = safe_modes(model, 5);
  REQUIRE(s >= 2);
  for (double t : {0.0, 1.0, 2.0}) {
    const CMatrix emb = nystrom_embed(ext, t, s);
    for (Index z = 0; z < Z.rows(); ++z) {
      for (Index c = 0; c < s; ++c) {
        Complex sum = 0.0;
        for (Index j = 0; j < X.rows(); ++j)
          sum += ext.affinity(z, j) * model.eigenvectors(j, c);
        sum *= std::pow(model.eigenvalues(c), t / 2.0 - 1.0);
        CHECK(std::abs(emb(z, c) - sum) <= 1e-9);
      }
    }
  }
}

TEST_CASE("an exhausted spectrum raises SpectralUnderflow") {
  Matrix X = random_points(8, 2, 29);
  X.row(7) = X.row(6);  // duplicate point forces a zero eigenvalue
  const auto model = build_model(X, KernelParams(1.0, -kPi / 4));
  CHECK(model.eigenvalues(model.size() - 1) <= kLambdaFloor);
  const auto ext = cross_affinity(X, X, model);
  CHECK_THROWS_AS(nystrom_embed(ext, 1.0, model.size()), Error);
  try {
    nystrom_embed(ext, 1.0, model.size());
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpectralUnderflow);
  }
}

TEST_CASE("full-spectrum reconstruction at t = 2 is the identity in-sample") {
  for (std::uint64_t seed : {31ull, 32ull}) {
    const Matrix X = random_points(12, 4, seed);
    const auto model = build_model(X, KernelParams(2.0, -kPi / 8));
    REQUIRE(model.eigenvalues(model.size() - 1) > kLambdaFloor);
    const auto ext = cross_affinity(X, X, model);
    const Matrix rec = reconstruct(ext, 2.0, X);
    CHECK((rec - X).norm() <= 1e-8 * X.norm());
  }
}

TEST_CASE("zero data reconstructs to zero") {
  const Matrix X = random_points(9, 3, 37);
  const auto model = build_model(X, KernelParams(1.2, -kPi / 4));
  const auto ext = cross_affinity(X, X, model);
  const Matrix rec = reconstruct(ext, 2.0, Matrix::Zero(9, 3));
  CHECK(rec.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("truncated reconstruction projects onto the retained modes") {
  const Matrix X = random_points(11, 3, 41);
  const auto model = build_model(X, KernelParams(1.8, -kPi / 4));
  const auto ext = cross_affinity(X, X, model);
  const Index s = 5;
  REQUIRE(model.eigenvalues(s - 1) > kLambdaFloor);
  const Matrix rec = reconstruct(ext, 2.0, X, s);
  const CMatrix phi = model.eigenvectors.leftCols(s);
  const CMatrix proj = phi * (phi.adjoint() * X.cast<Complex>());
  CHECK((rec - proj.real()).cwiseAbs().maxCoeff() <= 1e-8);
  // The complex residual carries exactly the dropped-mode energy; taking
  // the real part can only shrink it.
  const CMatrix rest = model.eigenvectors.rightCols(model.size() - s);
  const double dropped = (rest.adjoint() * X.cast<Complex>()).norm();
  CHECK(std::abs((X.cast<Complex>() - proj).norm() - dropped) <= 1e-8);
  CHECK((X - rec).norm() <= dropped + 1e-8);
}

TEST_CASE("reconstruction is linear in the lifted data") {
  const Matrix X = random_points(10, 3, 43);
  const auto model = build_model(X, KernelParams(1.5, -kPi / 6));
  const auto ext = cross_affinity(X, X, model);
  const Matrix Y1 = random_points(10, 2, 44);
  const Matrix Y2 = random_points(10, 2, 45);
  const Matrix lhs = reconstruct(ext, 2.0, 2.0 * Y1 - 0.5 * Y2);
  const Matrix rhs =
      2.0 * reconstruct(ext, 2.0, Y1) - 0.5 * reconstruct(ext, 2.0, Y2);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("drop_small_modes skips the degenerate tail instead of failing") {
  Matrix X = random_points(8, 2, 47);
  X.row(7) = X.row(6);
  const auto model = build_model(X, KernelParams(1.0, -kPi / 4));
  const auto ext = cross_affinity(X, X, model);
  CHECK_THROWS_AS(reconstruct(ext, 2.0, X), Error);
  Index rank = model.size();
  while (rank > 0 && model.eigenvalues(rank - 1) <= kLambdaFloor) --rank;
  const Matrix dropped = reconstruct(ext, 2.0, X, 0, true);
  const Matrix explicit_rank = reconstruct(ext, 2.0, X, rank);
  CHECK((dropped - explicit_rank).cwiseAbs().maxCoeff() <= 1e-12);
}
