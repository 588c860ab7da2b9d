#include "cdm/align.hpp"

#include <Eigen/QR>
#include <cmath>

#include "cdm/error.hpp"
#include "cdm/rng.hpp"
#include "doctest.h"

using namespace cdm;

namespace {
constexpr double kTwoPi = 6.283185307179586;

CMatrix random_complex(Index r, Index c, std::uint64_t seed) {
  Rng rng(seed);
  CMatrix M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = Complex(rng.normal(), rng.normal());
  return M;
}

CMatrix random_unitary(Index n, std::uint64_t seed) {
  const CMatrix A = random_complex(n, n, seed);
  Eigen::HouseholderQR<CMatrix> qr(A);
  return CMatrix(qr.householderQ());
}

// General 2x2 unitary from four angles: global phase times an SU(2) element.
CMatrix unitary2(double a, double b, double c, double t) {
  CMatrix U(2, 2);
  U(0, 0) = std::polar(std::cos(t), b);
  U(0, 1) = std::polar(std::sin(t), c);
  U(1, 0) = -std::polar(std::sin(t), -c);
  U(1, 1) = std::polar(std::cos(t), -b);
  return std::polar(1.0, a) * U;
}
}  // namespace

TEST_CASE("aligning an embedding with itself gives the identity") {
  const CMatrix E = random_complex(8, 3, 51);
  const auto res = procrustes_align(E, E);
  CHECK((res.rotation - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <=
        1e-10);
  CHECK(res.residual <= 1e-10);
  CHECK_FALSE(res.ambiguous);
}

TEST_CASE("a planted unitary is recovered exactly") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const CMatrix E_ref = random_complex(9, 3, 100 + seed);
    const CMatrix Q = random_unitary(3, 200 + seed);
    const CMatrix E_i = E_ref * Q.adjoint();
    const auto res = procrustes_align(E_i, E_ref);
    CHECK((res.rotation - Q).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(res.residual <= 1e-10);
  }
}

TEST_CASE("rotation is unitary") {
  for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
    const CMatrix E_i = random_complex(7, 3, 300 + seed);
    const CMatrix E_ref = random_complex(7, 3, 400 + seed);
    const auto res = procrustes_align(E_i, E_ref);
    const CMatrix gramian = res.rotation.adjoint() * res.rotation;
    CHECK((gramian - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("residual beats a dense grid of 2x2 unitaries") {
  for (std::uint64_t seed : {7ull, 8ull}) {
    const CMatrix E_i = random_complex(6, 2, 500 + seed);
    const CMatrix E_ref = random_complex(6, 2, 600 + seed);
    const auto res = procrustes_align(E_i, E_ref);
    const int steps = 10;
    for (int ia = 0; ia < steps; ++ia)
      for (int ib = 0; ib < steps; ++ib)
        for (int ic = 0; ic < steps; ++ic)
          for (int it = 0; it < steps; ++it) {
            const CMatrix Q = unitary2(
                kTwoPi * ia / steps, kTwoPi * ib / steps, kTwoPi * ic / steps,
                kTwoPi / 4.0 * it / steps);
            CHECK(res.residual <= (E_i * Q - E_ref).norm() + 1e-12);
          }
  }
}

TEST_CASE("first-order optimality certificate holds") {
  const CMatrix E_i = random_complex(10, 4, 71);
  const CMatrix E_ref = random_complex(10, 4, 72);
  const auto res = procrustes_align(E_i, E_ref);
  const CMatrix C = (E_i.adjoint() * E_ref) * res.rotation.adjoint();
  CHECK((C - C.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig((C + C.adjoint()) / 2.0);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("residual is invariant under a common change of basis") {
  const CMatrix E_i = random_complex(8, 3, 81);
  const CMatrix E_ref = random_complex(8, 3, 82);
  const CMatrix W = random_unitary(3, 83);
  const double base = procrustes_align(E_i, E_ref).residual;
  const double rotated = procrustes_align(E_i * W, E_ref * W).residual;
  CHECK(base == doctest::Approx(rotated).epsilon(1e-10));
}

TEST_CASE("rank-deficient cross-covariance sets the ambiguity flag") {
  CMatrix E_i = random_complex(6, 2, 91);
  E_i.col(1).setZero();
  const CMatrix E_ref = random_complex(6, 2, 92);
  const auto res = procrustes_align(E_i, E_ref);
  CHECK(res.ambiguous);
  const CMatrix gramian = res.rotation.adjoint() * res.rotation;
  CHECK((gramian - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("shape mismatches are rejected") {
  const CMatrix A = random_complex(5, 2, 93);
  const CMatrix B = random_complex(6, 2, 94);
  CHECK_THROWS_AS(procrustes_align(A, B), Error);
}
