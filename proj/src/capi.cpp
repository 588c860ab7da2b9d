#include "cdm/cdm_c.h"

#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cdm/align.hpp"
#include "cdm/error.hpp"
#include "cdm/extension.hpp"
#include "cdm/kernels.hpp"
#include "cdm/metrics.hpp"
#include "cdm/rng.hpp"
#include "cdm/spectral.hpp"
#include "cdm/synth.hpp"
#include "cdm/types.hpp"

struct cdm_model {
  cdm::DiffusionModel model;
  cdm::Matrix train;  // empty when built from a distance matrix

  cdm_model(cdm::DiffusionModel m, cdm::Matrix t)
      : model(std::move(m)), train(std::move(t)) {}
};

struct cdm_dataset {
  cdm::LabeledDataset data;
  cdm::Matrix relation;  // blended matrix of the three-class generator
};

static_assert(sizeof(int) == sizeof(int32_t),
              "label buffers assume 32-bit int");

namespace {

using cdm::ErrorCode;
using cdm::require;

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CRowMajor = Eigen::Matrix<cdm::Complex, Eigen::Dynamic, Eigen::Dynamic,
                                Eigen::RowMajor>;

thread_local std::string t_last_error = "no error";

cdm_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
      return CDM_ERR_INVALID_INPUT;
    case ErrorCode::DegenerateDegree:
      return CDM_ERR_DEGENERATE_DEGREE;
    case ErrorCode::NumericalFailure:
      return CDM_ERR_NUMERICAL_FAILURE;
    case ErrorCode::SpectralUnderflow:
      return CDM_ERR_SPECTRAL_UNDERFLOW;
    case ErrorCode::DegeneratePhase:
      return CDM_ERR_DEGENERATE_PHASE;
    case ErrorCode::ZeroVariance:
      return CDM_ERR_ZERO_VARIANCE;
    case ErrorCode::IoFailure:
      return CDM_ERR_IO_FAILURE;
  }
  return CDM_ERR_UNKNOWN;
}

template <typename Fn>
cdm_status guarded(Fn&& fn) {
  try {
    fn();
    return CDM_OK;
  } catch (const cdm::Error& e) {
    t_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return CDM_ERR_UNKNOWN;
  } catch (...) {
    t_last_error = "unknown failure";
    return CDM_ERR_UNKNOWN;
  }
}

// std::complex<double> is layout-compatible with double[2], so interleaved
// buffers map directly onto complex matrices.
cdm::Matrix copy_real(const double* p, int64_t rows, int64_t cols,
                      const char* what) {
  require(p != nullptr && rows > 0 && cols > 0, ErrorCode::InvalidInput, what);
  return Eigen::Map<const RowMajor>(p, rows, cols);
}

cdm::CMatrix copy_complex(const double* p, int64_t rows, int64_t cols,
                          const char* what) {
  require(p != nullptr && rows > 0 && cols > 0, ErrorCode::InvalidInput, what);
  return Eigen::Map<const CRowMajor>(
      reinterpret_cast<const cdm::Complex*>(p), rows, cols);
}

void write_real(const cdm::Matrix& M, double* out) {
  Eigen::Map<RowMajor>(out, M.rows(), M.cols()) = M;
}

void write_complex(const cdm::CMatrix& M, double* out) {
  Eigen::Map<CRowMajor>(reinterpret_cast<cdm::Complex*>(out), M.rows(),
                        M.cols()) = M;
}

cdm::LabelVector copy_labels(const int32_t* p, int64_t n, const char* what) {
  require(p != nullptr && n > 0, ErrorCode::InvalidInput, what);
  return cdm::LabelVector(p, p + n);
}

void require_out(const void* out, const char* what) {
  require(out != nullptr, ErrorCode::InvalidInput, what);
}

const cdm_model& deref(const cdm_model* model) {
  require(model != nullptr, ErrorCode::InvalidInput, "model handle is NULL");
  return *model;
}

const cdm_dataset& deref(const cdm_dataset* dataset) {
  require(dataset != nullptr, ErrorCode::InvalidInput,
          "dataset handle is NULL");
  return *dataset;
}

cdm::ExtensionOperator extend_operator(const cdm_model& handle,
                                       const double* X_new, int64_t n_new,
                                       int64_t d) {
  require(handle.train.size() > 0, ErrorCode::InvalidInput,
          "model was built from distances; extension needs sample features");
  const cdm::Matrix X =
      copy_real(X_new, n_new, d, "X_new must be a nonempty matrix");
  require(X.cols() == handle.train.cols(), ErrorCode::InvalidInput,
          "X_new feature dimension does not match the training data");
  return cdm::cross_affinity(X, handle.train, handle.model);
}

}  // namespace

extern "C" {

const char* cdm_last_error(void) { return t_last_error.c_str(); }

const char* cdm_version(void) { return "0.1.0"; }

uint64_t cdm_derive_seed(uint64_t seed, uint64_t stream) {
  return cdm::splitmix64(seed ^ cdm::splitmix64(stream + 0x9E3779B97F4A7C15ull));
}

cdm_status cdm_model_build(const double* X, int64_t n, int64_t d,
                           double sigma, double theta, cdm_model** out) {
  return guarded([&] {
    require_out(out, "output handle pointer is NULL");
    cdm::Matrix features = copy_real(X, n, d, "X must be a nonempty matrix");
    cdm::DiffusionModel model =
        cdm::build_model(features, cdm::KernelParams(sigma, theta));
    *out = new cdm_model(std::move(model), std::move(features));
  });
}

cdm_status cdm_model_build_from_sq_distances(const double* D2, int64_t n,
                                             double sigma, double theta,
                                             cdm_model** out) {
  return guarded([&] {
    require_out(out, "output handle pointer is NULL");
    const cdm::Matrix dist =
        copy_real(D2, n, n, "D2 must be a nonempty square matrix");
    cdm::DiffusionModel model =
        cdm::build_model_from_sq_distances(dist, cdm::KernelParams(sigma, theta));
    *out = new cdm_model(std::move(model), cdm::Matrix());
  });
}

void cdm_model_free(cdm_model* model) { delete model; }

cdm_status cdm_model_size(const cdm_model* model, int64_t* n) {
  return guarded([&] {
    require_out(n, "n is NULL");
    *n = deref(model).model.size();
  });
}

cdm_status cdm_model_eigenvalues(const cdm_model* model, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    const auto& m = deref(model).model;
    Eigen::Map<cdm::Vector>(out, m.eigenvalues.size()) = m.eigenvalues;
  });
}

cdm_status cdm_model_degree(const cdm_model* model, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    const auto& m = deref(model).model;
    Eigen::Map<cdm::Vector>(out, m.degree.size()) = m.degree;
  });
}

cdm_status cdm_model_operator(const cdm_model* model, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_complex(deref(model).model.op, out);
  });
}

cdm_status cdm_model_kernel(const cdm_model* model, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_complex(deref(model).model.kernel, out);
  });
}

cdm_status cdm_model_embed(const cdm_model* model, double t, int64_t s,
                           double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_complex(cdm::diffusion_maps(deref(model).model, t, s), out);
  });
}

cdm_status cdm_model_diffusion_distance(const cdm_model* model, double t,
                                        int64_t i, int64_t j, int64_t s,
                                        double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    *out = cdm::diffusion_distance_spectral(deref(model).model, t, i, j, s);
  });
}

cdm_status cdm_model_extend(const cdm_model* model, const double* X_new,
                            int64_t n_new, int64_t d, double t, int64_t s,
                            double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    const auto ext = extend_operator(deref(model), X_new, n_new, d);
    write_complex(cdm::nystrom_embed(ext, t, s), out);
  });
}

cdm_status cdm_model_reconstruct(const cdm_model* model, const double* X_new,
                                 int64_t n_new, int64_t d, double t,
                                 int64_t modes, int drop_small, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    const cdm_model& handle = deref(model);
    const auto ext = extend_operator(handle, X_new, n_new, d);
    write_real(cdm::reconstruct(ext, t, handle.train, modes, drop_small != 0),
               out);
  });
}

cdm_status cdm_dm_embed(const double* X, int64_t n, int64_t d, double sigma,
                        double t, int64_t s, double* out,
                        double* eigenvalues_out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    const cdm::Matrix features =
        copy_real(X, n, d, "X must be a nonempty matrix");
    const cdm::DmModel model = cdm::dm_build_model(features, sigma);
    write_real(cdm::dm_maps(model, t, s), out);
    if (eigenvalues_out != nullptr)
      Eigen::Map<cdm::Vector>(eigenvalues_out, model.eigenvalues.size()) =
          model.eigenvalues;
  });
}

cdm_status cdm_pca_embed(const double* X, int64_t n, int64_t d, int64_t s,
                         double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_real(
        cdm::pca_baseline(copy_real(X, n, d, "X must be a nonempty matrix"), s),
        out);
  });
}

cdm_status cdm_omega_from_ratio(double alpha, double beta, double* re,
                                double* im) {
  return guarded([&] {
    require_out(re, "re is NULL");
    require_out(im, "im is NULL");
    const cdm::Complex w = cdm::omega_from_ratio(alpha, beta);
    *re = w.real();
    *im = w.imag();
  });
}

cdm_status cdm_theta_from_ratio(double alpha, double beta, double* theta) {
  return guarded([&] {
    require_out(theta, "theta is NULL");
    *theta = cdm::theta_from_ratio(alpha, beta);
  });
}

cdm_status cdm_quadratic_form_check(const double* K, int64_t rows,
                                    int64_t cols, const double* f,
                                    double* lhs, double* rhs) {
  return guarded([&] {
    require_out(lhs, "lhs is NULL");
    require_out(rhs, "rhs is NULL");
    const cdm::CMatrix kernel =
        copy_complex(K, rows, cols, "K must be a nonempty matrix");
    require(f != nullptr, ErrorCode::InvalidInput, "f is NULL");
    const cdm::CVector vec = Eigen::Map<const cdm::CVector>(
        reinterpret_cast<const cdm::Complex*>(f), cols);
    const auto [l, r] = cdm::quadratic_form_check(kernel, vec);
    *lhs = l;
    *rhs = r;
  });
}

cdm_status cdm_gen_three_point(double d_near, double d_far, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_real(cdm::gen_three_point(d_near, d_far), out);
  });
}

cdm_status cdm_gen_three_class(int32_t n_per, double eta, double alpha,
                               double beta, uint64_t seed, cdm_dataset** out) {
  return guarded([&] {
    require_out(out, "output handle pointer is NULL");
    cdm::ThreeClassData data =
        cdm::gen_three_class(n_per, eta, alpha, beta, seed);
    auto handle = std::make_unique<cdm_dataset>();
    handle->data = std::move(data.dataset);
    handle->relation = std::move(data.blended);
    *out = handle.release();
  });
}

cdm_status cdm_gen_noisy_sinusoids(const double* freqs, int64_t n_freqs,
                                   int32_t n_per, double eps,
                                   int32_t t_samples, double dt,
                                   uint64_t seed, cdm_dataset** out) {
  return guarded([&] {
    require_out(out, "output handle pointer is NULL");
    require(freqs != nullptr && n_freqs > 0, ErrorCode::InvalidInput,
            "freqs must be a nonempty array");
    const std::vector<double> f(freqs, freqs + n_freqs);
    auto handle = std::make_unique<cdm_dataset>();
    handle->data = cdm::gen_noisy_sinusoids(f, n_per, eps, t_samples, dt, seed);
    *out = handle.release();
  });
}

void cdm_dataset_free(cdm_dataset* dataset) { delete dataset; }

cdm_status cdm_dataset_dims(const cdm_dataset* dataset, int64_t* n,
                            int64_t* d) {
  return guarded([&] {
    require_out(n, "n is NULL");
    require_out(d, "d is NULL");
    const auto& X = deref(dataset).data.X;
    *n = X.rows();
    *d = X.cols();
  });
}

cdm_status cdm_dataset_features(const cdm_dataset* dataset, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_real(deref(dataset).data.X, out);
  });
}

cdm_status cdm_dataset_labels(const cdm_dataset* dataset, int32_t* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    const auto& labels = deref(dataset).data.labels;
    std::memcpy(out, labels.data(), labels.size() * sizeof(int32_t));
  });
}

const char* cdm_dataset_provenance(const cdm_dataset* dataset) {
  return dataset == nullptr ? "" : dataset->data.provenance.c_str();
}

cdm_status cdm_dataset_relation(const cdm_dataset* dataset, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    const cdm_dataset& handle = deref(dataset);
    require(handle.relation.size() > 0, ErrorCode::InvalidInput,
            "dataset has no relation matrix");
    write_real(handle.relation, out);
  });
}

cdm_status cdm_stack_order_p(const double* X, int64_t t, int64_t c,
                             int32_t p, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_real(cdm::stack_order_p(
                   copy_real(X, t, c, "X must be a nonempty matrix"), p),
               out);
  });
}

cdm_status cdm_procrustes_align(const double* E_i, const double* E_ref,
                                int64_t n, int64_t s, double* rotation,
                                double* residual, int32_t* ambiguous) {
  return guarded([&] {
    require_out(rotation, "rotation is NULL");
    require_out(residual, "residual is NULL");
    const cdm::AlignmentResult result = cdm::procrustes_align(
        copy_complex(E_i, n, s, "E_i must be a nonempty matrix"),
        copy_complex(E_ref, n, s, "E_ref must be a nonempty matrix"));
    write_complex(result.rotation, rotation);
    *residual = result.residual;
    if (ambiguous != nullptr) *ambiguous = result.ambiguous ? 1 : 0;
  });
}

cdm_status cdm_realify(const double* E, int64_t n, int64_t s, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_real(
        cdm::realify(copy_complex(E, n, s, "E must be a nonempty matrix")),
        out);
  });
}

cdm_status cdm_kmeans(const double* E, int64_t n, int64_t d, int32_t k,
                      uint64_t seed, int32_t* labels, double* inertia) {
  return guarded([&] {
    require_out(labels, "labels is NULL");
    const cdm::KMeansResult result = cdm::kmeans(
        copy_real(E, n, d, "E must be a nonempty matrix"), k, seed);
    std::memcpy(labels, result.labels.data(),
                result.labels.size() * sizeof(int32_t));
    if (inertia != nullptr) *inertia = result.inertia;
  });
}

cdm_status cdm_clustering_accuracy(const int32_t* truth, const int32_t* pred,
                                   int64_t n, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    *out = cdm::clustering_accuracy(copy_labels(truth, n, "truth is NULL"),
                                    copy_labels(pred, n, "pred is NULL"));
  });
}

cdm_status cdm_ari(const int32_t* truth, const int32_t* pred, int64_t n,
                   double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    *out = cdm::ari(copy_labels(truth, n, "truth is NULL"),
                    copy_labels(pred, n, "pred is NULL"));
  });
}

cdm_status cdm_nmi(const int32_t* truth, const int32_t* pred, int64_t n,
                   double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    *out = cdm::nmi(copy_labels(truth, n, "truth is NULL"),
                    copy_labels(pred, n, "pred is NULL"));
  });
}

cdm_status cdm_fdr(const double* E, int64_t n, int64_t d,
                   const int32_t* labels, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    *out = cdm::fdr(copy_real(E, n, d, "E must be a nonempty matrix"),
                    copy_labels(labels, n, "labels is NULL"));
  });
}

cdm_status cdm_classification_metrics(const int32_t* truth,
                                      const int32_t* pred, int64_t n,
                                      double* accuracy, double* macro_f1,
                                      double* kappa) {
  return guarded([&] {
    require_out(accuracy, "accuracy is NULL");
    require_out(macro_f1, "macro_f1 is NULL");
    require_out(kappa, "kappa is NULL");
    const cdm::ClassificationReport report = cdm::classification_metrics(
        cdm::confusion_matrix(copy_labels(truth, n, "truth is NULL"),
                              copy_labels(pred, n, "pred is NULL")));
    *accuracy = report.accuracy;
    *macro_f1 = report.macro_f1;
    *kappa = report.kappa;
  });
}

cdm_status cdm_fc(const double* X, int64_t t, int64_t m, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    write_real(cdm::fc(copy_real(X, t, m, "X must be a nonempty matrix")),
               out);
  });
}

cdm_status cdm_fc_error(const double* FC, const double* FC_G, int64_t m,
                        double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    *out = cdm::fc_error(copy_real(FC, m, m, "FC must be a nonempty matrix"),
                         copy_real(FC_G, m, m, "FC_G must be a nonempty matrix"));
  });
}

cdm_status cdm_fc_corr(const double* FC, const double* FC_G, int64_t m,
                       double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    *out = cdm::fc_corr(copy_real(FC, m, m, "FC must be a nonempty matrix"),
                        copy_real(FC_G, m, m, "FC_G must be a nonempty matrix"));
  });
}

cdm_status cdm_edge_dynamics(const double* X, int64_t t, int64_t m,
                             double* edge_series, double* fcd) {
  return guarded([&] {
    const cdm::EdgeDynamics result =
        cdm::edge_dynamics(copy_real(X, t, m, "X must be a nonempty matrix"));
    if (edge_series != nullptr) write_real(result.edge_series, edge_series);
    if (fcd != nullptr) write_real(result.fcd, fcd);
  });
}

cdm_status cdm_ecm_entropy(const double* fcd, int64_t t, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    *out = cdm::ecm_entropy(
        copy_real(fcd, t, t, "fcd must be a nonempty matrix"));
  });
}

cdm_status cdm_ecm_corr(const double* h_source, const double* h_embed,
                        int64_t n, double* out) {
  return guarded([&] {
    require_out(out, "out is NULL");
    require(h_source != nullptr && h_embed != nullptr && n > 0,
            ErrorCode::InvalidInput, "entropy profiles must be nonempty");
    *out = cdm::ecm_corr(Eigen::Map<const cdm::Vector>(h_source, n),
                         Eigen::Map<const cdm::Vector>(h_embed, n));
  });
}

}  // extern "C"
