#include <cstdint>
#include <string>
#include <vector>

#include <doctest.h>

#include "cdm/cdm_c.h"
#include "cdm/extension.hpp"
#include "cdm/kernels.hpp"
#include "cdm/metrics.hpp"
#include "cdm/rng.hpp"
#include "cdm/spectral.hpp"
#include "cdm/synth.hpp"

namespace {

cdm::Matrix random_points(cdm::Index n, cdm::Index d, std::uint64_t seed) {
  cdm::Rng rng(seed);
  cdm::Matrix X(n, d);
  for (cdm::Index i = 0; i < n; ++i)
    for (cdm::Index j = 0; j < d; ++j) X(i, j) = rng.normal();
  return X;
}

std::vector<double> row_major(const cdm::Matrix& M) {
  std::vector<double> out(static_cast<std::size_t>(M.size()));
  for (cdm::Index i = 0; i < M.rows(); ++i)
    for (cdm::Index j = 0; j < M.cols(); ++j)
      out[static_cast<std::size_t>(i * M.cols() + j)] = M(i, j);
  return out;
}

std::vector<double> interleaved(const cdm::CMatrix& M) {
  std::vector<double> out(static_cast<std::size_t>(2 * M.size()));
  for (cdm::Index i = 0; i < M.rows(); ++i)
    for (cdm::Index j = 0; j < M.cols(); ++j) {
      const auto k = static_cast<std::size_t>(2 * (i * M.cols() + j));
      out[k] = M(i, j).real();
      out[k + 1] = M(i, j).imag();
    }
  return out;
}

struct ModelHandle {
  cdm_model* ptr = nullptr;
  ~ModelHandle() { cdm_model_free(ptr); }
};

struct DatasetHandle {
  cdm_dataset* ptr = nullptr;
  ~DatasetHandle() { cdm_dataset_free(ptr); }
};

}  // namespace

TEST_CASE("model build matches the native library bitwise") {
  const cdm::Matrix X = random_points(12, 3, 101);
  const cdm::KernelParams params(1.5, -0.7);
  const cdm::DiffusionModel native = cdm::build_model(X, params);

  const std::vector<double> buf = row_major(X);
  ModelHandle handle;
  REQUIRE(cdm_model_build(buf.data(), 12, 3, 1.5, -0.7, &handle.ptr) ==
          CDM_OK);

  int64_t n = 0;
  REQUIRE(cdm_model_size(handle.ptr, &n) == CDM_OK);
  CHECK(n == 12);

  std::vector<double> eigenvalues(12), degrees(12);
  REQUIRE(cdm_model_eigenvalues(handle.ptr, eigenvalues.data()) == CDM_OK);
  REQUIRE(cdm_model_degree(handle.ptr, degrees.data()) == CDM_OK);
  for (int i = 0; i < 12; ++i) {
    CHECK(eigenvalues[i] == native.eigenvalues(i));
    CHECK(degrees[i] == native.degree(i));
  }

  std::vector<double> op(2 * 12 * 12), kernel(2 * 12 * 12);
  REQUIRE(cdm_model_operator(handle.ptr, op.data()) == CDM_OK);
  REQUIRE(cdm_model_kernel(handle.ptr, kernel.data()) == CDM_OK);
  CHECK(op == interleaved(native.op));
  CHECK(kernel == interleaved(native.kernel));

  std::vector<double> embed(2 * 12 * 4);
  REQUIRE(cdm_model_embed(handle.ptr, 2.0, 4, embed.data()) == CDM_OK);
  CHECK(embed == interleaved(cdm::diffusion_maps(native, 2.0, 4)));

  double dist = 0.0;
  REQUIRE(cdm_model_diffusion_distance(handle.ptr, 2.0, 1, 7, 12, &dist) ==
          CDM_OK);
  CHECK(dist == cdm::diffusion_distance_spectral(native, 2.0, 1, 7, 12));
}

TEST_CASE("extension and reconstruction round-trip through the C boundary") {
  const cdm::Matrix X = random_points(10, 2, 55);
  const cdm::Matrix X_new = random_points(3, 2, 56);
  const cdm::KernelParams params(2.0, -0.4);
  const cdm::DiffusionModel native = cdm::build_model(X, params);
  const auto ext = cdm::cross_affinity(X_new, X, native);

  const std::vector<double> buf = row_major(X);
  const std::vector<double> buf_new = row_major(X_new);
  ModelHandle handle;
  REQUIRE(cdm_model_build(buf.data(), 10, 2, 2.0, -0.4, &handle.ptr) ==
          CDM_OK);

  std::vector<double> embed(2 * 3 * 5);
  REQUIRE(cdm_model_extend(handle.ptr, buf_new.data(), 3, 2, 1.0, 5,
                           embed.data()) == CDM_OK);
  CHECK(embed == interleaved(cdm::nystrom_embed(ext, 1.0, 5)));

  std::vector<double> rec(3 * 2);
  REQUIRE(cdm_model_reconstruct(handle.ptr, buf_new.data(), 3, 2, 2.0, 0, 0,
                                rec.data()) == CDM_OK);
  CHECK(rec == row_major(cdm::reconstruct(ext, 2.0, X)));

  SUBCASE("feature dimension mismatch is rejected") {
    const cdm::Matrix bad = random_points(3, 4, 57);
    const std::vector<double> bad_buf = row_major(bad);
    std::vector<double> sink(2 * 3 * 5);
    CHECK(cdm_model_extend(handle.ptr, bad_buf.data(), 3, 4, 1.0, 5,
                           sink.data()) == CDM_ERR_INVALID_INPUT);
  }
}

TEST_CASE("distance-built models report extension as unsupported") {
  const cdm::Matrix D2 = cdm::gen_three_point(1.0, 2.0);
  const std::vector<double> buf = row_major(D2);
  ModelHandle handle;
  REQUIRE(cdm_model_build_from_sq_distances(buf.data(), 3, 1.0, -0.3,
                                            &handle.ptr) == CDM_OK);

  std::vector<double> sink(2 * 3 * 2);
  const double point[2] = {0.0, 0.0};
  CHECK(cdm_model_extend(handle.ptr, point, 1, 2, 1.0, 2, sink.data()) ==
        CDM_ERR_INVALID_INPUT);
  CHECK(std::string(cdm_last_error()).find("features") != std::string::npos);
}

TEST_CASE("status codes mirror the native error taxonomy") {
  ModelHandle handle;
  const double X[4] = {0.0, 0.0, 1.0, 1.0};
  CHECK(cdm_model_build(X, 2, 2, -1.0, 0.0, &handle.ptr) ==
        CDM_ERR_INVALID_INPUT);
  CHECK(cdm_model_build(nullptr, 2, 2, 1.0, 0.0, &handle.ptr) ==
        CDM_ERR_INVALID_INPUT);
  CHECK(cdm_model_build(X, 2, 2, 1.0, 0.0, nullptr) == CDM_ERR_INVALID_INPUT);

  SUBCASE("spectral underflow surfaces from duplicate-point models") {
    const double dup[4] = {1.0, 2.0, 1.0, 2.0};
    REQUIRE(cdm_model_build(dup, 2, 2, 1.0, -0.5, &handle.ptr) == CDM_OK);
    std::vector<double> sink(2 * 2 * 2);
    CHECK(cdm_model_embed(handle.ptr, 1.0, 2, sink.data()) == CDM_OK);
    CHECK(cdm_model_extend(handle.ptr, dup, 2, 2, 1.0, 2, sink.data()) ==
          CDM_ERR_SPECTRAL_UNDERFLOW);
    CHECK(std::string(cdm_last_error()).size() > 0);
  }
}

TEST_CASE("dataset handles expose the generators") {
  DatasetHandle sins;
  const double freqs[2] = {1.0, 2.0};
  REQUIRE(cdm_gen_noisy_sinusoids(freqs, 2, 3, 0.5, 20, 0.01, 9,
                                  &sins.ptr) == CDM_OK);

  const cdm::LabeledDataset native =
      cdm::gen_noisy_sinusoids({1.0, 2.0}, 3, 0.5, 20, 0.01, 9);

  int64_t n = 0, d = 0;
  REQUIRE(cdm_dataset_dims(sins.ptr, &n, &d) == CDM_OK);
  CHECK(n == 6);
  CHECK(d == 20);

  std::vector<double> X(static_cast<std::size_t>(n * d));
  std::vector<int32_t> labels(static_cast<std::size_t>(n));
  REQUIRE(cdm_dataset_features(sins.ptr, X.data()) == CDM_OK);
  REQUIRE(cdm_dataset_labels(sins.ptr, labels.data()) == CDM_OK);
  CHECK(X == row_major(native.X));
  for (int i = 0; i < 6; ++i) CHECK(labels[i] == native.labels[i]);
  CHECK(std::string(cdm_dataset_provenance(sins.ptr)) == native.provenance);

  std::vector<double> sink(static_cast<std::size_t>(n * n));
  CHECK(cdm_dataset_relation(sins.ptr, sink.data()) == CDM_ERR_INVALID_INPUT);

  DatasetHandle three;
  REQUIRE(cdm_gen_three_class(5, 2.0, 0.1, 0.5, 77, &three.ptr) == CDM_OK);
  const cdm::ThreeClassData native3 = cdm::gen_three_class(5, 2.0, 0.1, 0.5, 77);
  REQUIRE(cdm_dataset_dims(three.ptr, &n, &d) == CDM_OK);
  CHECK(n == 15);
  CHECK(d == native3.dataset.X.cols());
  std::vector<double> relation(static_cast<std::size_t>(n * n));
  REQUIRE(cdm_dataset_relation(three.ptr, relation.data()) == CDM_OK);
  CHECK(relation == row_major(native3.blended));
}

TEST_CASE("stacking, baselines and helpers pass through") {
  const cdm::Matrix X = random_points(9, 4, 13);
  const std::vector<double> buf = row_major(X);

  std::vector<double> stacked(7 * 12);
  REQUIRE(cdm_stack_order_p(buf.data(), 9, 4, 3, stacked.data()) == CDM_OK);
  CHECK(stacked == row_major(cdm::stack_order_p(X, 3)));

  std::vector<double> dm(9 * 3), eigenvalues(9);
  REQUIRE(cdm_dm_embed(buf.data(), 9, 4, 1.2, 1.0, 3, dm.data(),
                       eigenvalues.data()) == CDM_OK);
  CHECK(dm == row_major(cdm::dm_baseline(X, 1.2, 1.0, 3)));
  const cdm::DmModel dm_native = cdm::dm_build_model(X, 1.2);
  for (int i = 0; i < 9; ++i) CHECK(eigenvalues[i] == dm_native.eigenvalues(i));

  std::vector<double> pca(9 * 2);
  REQUIRE(cdm_pca_embed(buf.data(), 9, 4, 2, pca.data()) == CDM_OK);
  CHECK(pca == row_major(cdm::pca_baseline(X, 2)));

  double re = 0.0, im = 0.0, theta = 0.0;
  REQUIRE(cdm_omega_from_ratio(0.1, 0.5, &re, &im) == CDM_OK);
  const cdm::Complex w = cdm::omega_from_ratio(0.1, 0.5);
  CHECK(re == w.real());
  CHECK(im == w.imag());
  REQUIRE(cdm_theta_from_ratio(0.1, 0.5, &theta) == CDM_OK);
  CHECK(theta == cdm::theta_from_ratio(0.1, 0.5));
  CHECK(cdm_theta_from_ratio(0.0, 0.0, &theta) == CDM_ERR_INVALID_INPUT);
}

TEST_CASE("quadratic form identity holds through the C boundary") {
  const cdm::Matrix X = random_points(8, 3, 21);
  const cdm::CMatrix K =
      cdm::complex_kernel(cdm::pairwise_sq_distances(X),
                          cdm::KernelParams(1.0, -0.6));
  cdm::Rng rng(22);
  cdm::CVector f(8);
  for (int i = 0; i < 8; ++i) f(i) = cdm::Complex(rng.normal(), rng.normal());

  std::vector<double> kbuf = interleaved(K);
  std::vector<double> fbuf(16);
  for (int i = 0; i < 8; ++i) {
    fbuf[2 * i] = f(i).real();
    fbuf[2 * i + 1] = f(i).imag();
  }
  double lhs = 0.0, rhs = 0.0;
  REQUIRE(cdm_quadratic_form_check(kbuf.data(), 8, 8, fbuf.data(), &lhs,
                                   &rhs) == CDM_OK);
  CHECK(std::abs(lhs - rhs) <= 1e-8 * (1.0 + std::abs(rhs)));
}

TEST_CASE("alignment and realify pass through") {
  const cdm::Matrix X = random_points(10, 3, 31);
  const cdm::DiffusionModel model =
      cdm::build_model(X, cdm::KernelParams(1.0, -0.8));
  const cdm::CMatrix E = cdm::diffusion_maps(model, 1.0, 3);

  cdm::CMatrix Q(3, 3);
  Q.setZero();
  Q(0, 1) = cdm::Complex(0.0, 1.0);
  Q(1, 0) = 1.0;
  Q(2, 2) = cdm::Complex(0.0, -1.0);
  const cdm::CMatrix E_rot = E * Q;

  const std::vector<double> e_buf = interleaved(E_rot);
  const std::vector<double> ref_buf = interleaved(E);
  std::vector<double> rotation(2 * 3 * 3);
  double residual = -1.0;
  int32_t ambiguous = -1;
  REQUIRE(cdm_procrustes_align(e_buf.data(), ref_buf.data(), 10, 3,
                               rotation.data(), &residual, &ambiguous) ==
          CDM_OK);
  CHECK(residual <= 1e-10);
  CHECK(ambiguous == 0);
  const cdm::CMatrix recovered = cdm::complexify(
      cdm::realify(Eigen::Map<const Eigen::Matrix<
                       cdm::Complex, Eigen::Dynamic, Eigen::Dynamic,
                       Eigen::RowMajor>>(
          reinterpret_cast<const cdm::Complex*>(rotation.data()), 3, 3)));
  CHECK((recovered - Q.adjoint()).norm() <= 1e-10);

  std::vector<double> flat(10 * 6);
  REQUIRE(cdm_realify(ref_buf.data(), 10, 3, flat.data()) == CDM_OK);
  CHECK(flat == row_major(cdm::realify(E)));
}

TEST_CASE("clustering and metrics pass through") {
  const cdm::Matrix X = random_points(20, 2, 41);
  const std::vector<double> buf = row_major(X);

  std::vector<int32_t> labels(20);
  double inertia = -1.0;
  REQUIRE(cdm_kmeans(buf.data(), 20, 2, 3, 5, labels.data(), &inertia) ==
          CDM_OK);
  const cdm::KMeansResult native = cdm::kmeans(X, 3, 5);
  for (int i = 0; i < 20; ++i) CHECK(labels[i] == native.labels[i]);
  CHECK(inertia == native.inertia);

  const int32_t truth[4] = {0, 0, 1, 1};
  const int32_t pred[4] = {1, 1, 0, 0};
  double value = 0.0;
  REQUIRE(cdm_clustering_accuracy(truth, pred, 4, &value) == CDM_OK);
  CHECK(value == 1.0);
  REQUIRE(cdm_ari(truth, pred, 4, &value) == CDM_OK);
  CHECK(value == 1.0);
  REQUIRE(cdm_nmi(truth, pred, 4, &value) == CDM_OK);
  CHECK(value == 1.0);

  double accuracy = 0.0, macro_f1 = 0.0, kappa = 0.0;
  REQUIRE(cdm_classification_metrics(truth, truth, 4, &accuracy, &macro_f1,
                                     &kappa) == CDM_OK);
  CHECK(accuracy == 1.0);
  CHECK(macro_f1 == 1.0);
  CHECK(kappa == 1.0);

  std::vector<int32_t> native_labels(native.labels.begin(),
                                     native.labels.end());
  REQUIRE(cdm_fdr(buf.data(), 20, 2, native_labels.data(), &value) == CDM_OK);
  CHECK(value == cdm::fdr(X, native.labels));
}

TEST_CASE("signal metrics pass through") {
  const cdm::Matrix X = random_points(30, 4, 61);
  const std::vector<double> buf = row_major(X);

  std::vector<double> corr(16);
  REQUIRE(cdm_fc(buf.data(), 30, 4, corr.data()) == CDM_OK);
  const cdm::Matrix FC = cdm::fc(X);
  CHECK(corr == row_major(FC));

  double value = -1.0;
  REQUIRE(cdm_fc_error(corr.data(), corr.data(), 4, &value) == CDM_OK);
  CHECK(value == 0.0);
  REQUIRE(cdm_fc_corr(corr.data(), corr.data(), 4, &value) == CDM_OK);
  CHECK(value == 1.0);

  std::vector<double> edges(30 * 12), fcd(30 * 30);
  REQUIRE(cdm_edge_dynamics(buf.data(), 30, 4, edges.data(), fcd.data()) ==
          CDM_OK);
  const cdm::EdgeDynamics native = cdm::edge_dynamics(X);
  CHECK(edges == row_major(native.edge_series));
  CHECK(fcd == row_major(native.fcd));

  REQUIRE(cdm_ecm_entropy(fcd.data(), 30, &value) == CDM_OK);
  CHECK(value == cdm::ecm_entropy(native.fcd));

  const double h1[3] = {0.0, 1.0, 2.0};
  const double h2[3] = {1.0, 3.0, 4.0};
  REQUIRE(cdm_ecm_corr(h1, h2, 3, &value) == CDM_OK);
  CHECK(value == doctest::Approx(0.9819805060619657).epsilon(1e-12));
}

TEST_CASE("three-point generator and null-handle conventions") {
  double out[9];
  REQUIRE(cdm_gen_three_point(1.0, 2.0, out) == CDM_OK);
  const std::vector<double> expected = row_major(cdm::gen_three_point(1.0, 2.0));
  for (int i = 0; i < 9; ++i) CHECK(out[i] == expected[i]);
  CHECK(cdm_gen_three_point(2.0, 1.0, out) == CDM_ERR_INVALID_INPUT);

  cdm_model_free(nullptr);
  cdm_dataset_free(nullptr);
  CHECK(std::string(cdm_dataset_provenance(nullptr)).empty());
  int64_t n = 0;
  CHECK(cdm_model_size(nullptr, &n) == CDM_ERR_INVALID_INPUT);
  CHECK(std::string(cdm_version()) == "0.1.0");
}
