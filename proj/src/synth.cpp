#include "cdm/synth.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "cdm/error.hpp"
#include "cdm/rng.hpp"

namespace cdm {

namespace {
constexpr double kTwoPi = 6.283185307179586;

std::string format_params(const std::string& name,
                          const std::string& body, std::uint64_t seed) {
  std::ostringstream out;
  out << name << "(" << body << ", seed=" << seed << ")";
  return out.str();
}
}  // namespace

Matrix gen_three_point(double d_near, double d_far) {
  require(std::isfinite(d_near) && std::isfinite(d_far) && d_near > 0.0 &&
              d_near < d_far,
          ErrorCode::InvalidInput,
          "gen_three_point: need 0 < d_near < d_far");
  Matrix D2 = Matrix::Zero(3, 3);
  D2(0, 1) = D2(1, 0) = d_near * d_near;
  D2(0, 2) = D2(2, 0) = d_far * d_far;
  D2(1, 2) = D2(2, 1) = d_far * d_far;
  return D2;
}

ThreeClassData gen_three_class(int n_per, double eta, double alpha,
                               double beta, std::uint64_t seed) {
  require(n_per >= 2, ErrorCode::InvalidInput,
          "gen_three_class: n_per must be at least 2");
  require(std::isfinite(eta) && eta >= 0.0, ErrorCode::InvalidInput,
          "gen_three_class: eta must be nonnegative");
  require(std::isfinite(alpha) && std::isfinite(beta) && alpha >= 0.0 &&
              beta >= 0.0 && (alpha > 0.0 || beta > 0.0),
          ErrorCode::InvalidInput,
          "gen_three_class: blend weights must be nonnegative, not both zero");
  const std::array<Complex, 3> means = {Complex(1.0, 1.0), Complex(1.0, -1.0),
                                        Complex(-1.0, 2.0)};
  const Index n = 3 * static_cast<Index>(n_per);
  LabelVector labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    labels[static_cast<std::size_t>(i)] = static_cast<int>(i / n_per);

  // Off-diagonal entries row-major, one z then one y draw per entry, so the
  // matrix is a pure function of (parameters, seed).
  Rng rng(seed);
  CMatrix D = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double z = rng.normal();
      const double y = rng.normal();
      D(i, j) = means[static_cast<std::size_t>(j / n_per)] +
                eta * Complex(z, y);
    }
  }

  double max_abs = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) max_abs = std::max(max_abs, std::abs(D(i, j)));
  require(max_abs > 0.0, ErrorCode::InvalidInput,
          "gen_three_class: relation matrix is identically zero");

  Matrix Dt = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      double phase = std::arg(D(i, j));
      if (phase < 0.0) phase += kTwoPi;
      Dt(i, j) = alpha * std::abs(D(i, j)) / max_abs + beta * phase / kTwoPi;
    }
  }
  Matrix D_final = (Dt + Dt.transpose()) / 2.0;

  // Classical MDS on D_final treated as squared dissimilarities. Mirroring
  // the centered matrix keeps it symmetric to the bit.
  const Vector row_mean = D_final.rowwise().mean();
  const double grand_mean = row_mean.mean();
  Matrix B(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      B(i, j) = -0.5 * (D_final(i, j) - row_mean(i) - row_mean(j) + grand_mean);
      B(j, i) = B(i, j);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(B);
  require(solver.info() == Eigen::Success, ErrorCode::NumericalFailure,
          "gen_three_class: MDS eigendecomposition did not converge");
  const double lambda_max = solver.eigenvalues()(n - 1);
  const double eig_tol = 1e-10 * std::max(lambda_max, 0.0);
  std::vector<Index> kept;
  for (Index i = n - 1; i >= 0; --i)
    if (solver.eigenvalues()(i) > eig_tol) kept.push_back(i);
  Matrix X(n, static_cast<Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    Vector v = solver.eigenvectors().col(kept[c]);
    Index pivot = 0;
    double best = -1.0;
    for (Index r = 0; r < n; ++r) {
      const double m = std::abs(v(r));
      if (m > best) {
        best = m;
        pivot = r;
      }
    }
    if (v(pivot) < 0.0) v = -v;
    X.col(static_cast<Index>(c)) =
        v * std::sqrt(solver.eigenvalues()(kept[c]));
  }

  std::ostringstream body;
  body << "n_per=" << n_per << ", eta=" << eta << ", alpha=" << alpha
       << ", beta=" << beta;
  ThreeClassData out;
  out.dataset = LabeledDataset{std::move(X), std::move(labels), seed,
                               format_params("three_class", body.str(), seed)};
  out.relation = ComplexRelationMatrix{std::move(D), means, eta};
  out.blended = std::move(D_final);
  return out;
}

LabeledDataset gen_noisy_sinusoids(const std::vector<double>& freqs, int n_per,
                                   double eps, int t_samples, double dt,
                                   std::uint64_t seed) {
  require(!freqs.empty(), ErrorCode::InvalidInput,
          "gen_noisy_sinusoids: freqs must be nonempty");
  require(n_per >= 1, ErrorCode::InvalidInput,
          "gen_noisy_sinusoids: n_per must be positive");
  require(std::isfinite(eps) && eps >= 0.0, ErrorCode::InvalidInput,
          "gen_noisy_sinusoids: eps must be nonnegative");
  require(t_samples >= 2, ErrorCode::InvalidInput,
          "gen_noisy_sinusoids: t_samples must be at least 2");
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidInput,
          "gen_noisy_sinusoids: dt must be positive");
  const Index n = static_cast<Index>(freqs.size()) * n_per;
  const Index T = t_samples;
  Matrix X(n, T);
  LabelVector labels(static_cast<std::size_t>(n));
  Rng rng(seed);
  Index row = 0;
  for (std::size_t c = 0; c < freqs.size(); ++c) {
    for (int r = 0; r < n_per; ++r, ++row) {
      labels[static_cast<std::size_t>(row)] = static_cast<int>(c);
      for (Index k = 0; k < T; ++k)
        X(row, k) = std::sin(kTwoPi * freqs[c] * static_cast<double>(k) * dt) +
                    eps * rng.normal();
    }
  }
  std::ostringstream body;
  body << "freqs=[";
  for (std::size_t c = 0; c < freqs.size(); ++c)
    body << (c ? "," : "") << freqs[c];
  body << "], n_per=" << n_per << ", eps=" << eps
       << ", t_samples=" << t_samples << ", dt=" << dt;
  return LabeledDataset{std::move(X), std::move(labels), seed,
                        format_params("noisy_sinusoids", body.str(), seed)};
}

Matrix stack_order_p(const Matrix& series, int p) {
  const Index T = series.rows();
  const Index C = series.cols();
  require(p >= 1, ErrorCode::InvalidInput, "stack_order_p: p must be >= 1");
  require(T > p, ErrorCode::InvalidInput,
          "stack_order_p: need more rows than the stacking order");
  Matrix out(T - p + 1, C * p);
  for (Index t = 0; t + p <= T; ++t)
    for (int q = 0; q < p; ++q) out.block(t, q * C, 1, C) = series.row(t + q);
  return out;
}

}  // namespace cdm
