/* C interface to the complex diffusion maps library.
 *
 * Conventions:
 *  - Every function returns a cdm_status; CDM_OK is 0. On failure,
 *    cdm_last_error() describes the problem for the calling thread.
 *  - Real matrices are row-major double arrays of length rows*cols.
 *  - Complex matrices are row-major interleaved arrays of length
 *    rows*cols*2: entry (i, j) occupies slots [2*(i*cols+j)] (real part)
 *    and [2*(i*cols+j)+1] (imaginary part).
 *  - Output buffers are caller-allocated; dimensions are either fixed by
 *    the call or queried beforehand (cdm_model_size, cdm_dataset_dims).
 *  - Handles are created by cdm_*_build/cdm_gen_* and released with the
 *    matching *_free; freeing NULL is a no-op.
 */
#ifndef CDM_C_H
#define CDM_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cdm_status {
  CDM_OK = 0,
  CDM_ERR_INVALID_INPUT = 1,
  CDM_ERR_DEGENERATE_DEGREE = 2,
  CDM_ERR_NUMERICAL_FAILURE = 3,
  CDM_ERR_SPECTRAL_UNDERFLOW = 4,
  CDM_ERR_DEGENERATE_PHASE = 5,
  CDM_ERR_ZERO_VARIANCE = 6,
  CDM_ERR_IO_FAILURE = 7,
  CDM_ERR_UNKNOWN = 8
} cdm_status;

/* Message for the most recent failure on this thread; never NULL. */
const char* cdm_last_error(void);

const char* cdm_version(void);

/* Deterministic stream derivation: the same rule the library's own
 * generators use to fan independent streams out of one top-level seed. */
uint64_t cdm_derive_seed(uint64_t seed, uint64_t stream);

/* ------------------------------------------------------------------ */
/* Diffusion model: kernel, normalized operator, spectrum.             */

typedef struct cdm_model cdm_model;

/* Builds the model from N points in R^d (X is N x d, row-major). The model
 * keeps a copy of X so it can extend and reconstruct later. */
cdm_status cdm_model_build(const double* X, int64_t n, int64_t d,
                           double sigma, double theta, cdm_model** out);

/* Builds from a precomputed N x N squared-distance (or nonnegative
 * dissimilarity) matrix. Extension/reconstruction are unavailable. */
cdm_status cdm_model_build_from_sq_distances(const double* D2, int64_t n,
                                             double sigma, double theta,
                                             cdm_model** out);

void cdm_model_free(cdm_model* model);

cdm_status cdm_model_size(const cdm_model* model, int64_t* n);

/* Spectrum of the normalized operator, nonincreasing, length N. */
cdm_status cdm_model_eigenvalues(const cdm_model* model, double* out);

/* Row degrees, length N. */
cdm_status cdm_model_degree(const cdm_model* model, double* out);

/* Normalized Hermitian operator A, complex N x N. */
cdm_status cdm_model_operator(const cdm_model* model, double* out);

/* Kernel matrix K, complex N x N. */
cdm_status cdm_model_kernel(const cdm_model* model, double* out);

/* Diffusion map at time t with s coordinates, complex N x s. */
cdm_status cdm_model_embed(const cdm_model* model, double t, int64_t s,
                           double* out);

/* Spectral diffusion distance between samples i and j. */
cdm_status cdm_model_diffusion_distance(const cdm_model* model, double t,
                                        int64_t i, int64_t j, int64_t s,
                                        double* out);

/* Nystrom embedding of n_new points (X_new is n_new x d), complex
 * n_new x s output. Requires a model built from sample features. */
cdm_status cdm_model_extend(const cdm_model* model, const double* X_new,
                            int64_t n_new, int64_t d, double t, int64_t s,
                            double* out);

/* Reconstruction of data-space rows for n_new points, real n_new x d
 * output. modes = 0 uses the full spectrum; drop_small != 0 silently
 * discards modes at or below the spectral floor. */
cdm_status cdm_model_reconstruct(const cdm_model* model, const double* X_new,
                                 int64_t n_new, int64_t d, double t,
                                 int64_t modes, int drop_small, double* out);

/* ------------------------------------------------------------------ */
/* Baselines.                                                          */

/* Classical diffusion maps with a real Gaussian kernel; out is real
 * N x s; eigenvalues_out (length n) may be NULL. */
cdm_status cdm_dm_embed(const double* X, int64_t n, int64_t d, double sigma,
                        double t, int64_t s, double* out,
                        double* eigenvalues_out);

/* PCA scores on the top s principal directions; out is real N x s. */
cdm_status cdm_pca_embed(const double* X, int64_t n, int64_t d, int64_t s,
                         double* out);

/* ------------------------------------------------------------------ */
/* Kernel parameter helpers.                                           */

cdm_status cdm_omega_from_ratio(double alpha, double beta, double* re,
                                double* im);
cdm_status cdm_theta_from_ratio(double alpha, double beta, double* theta);

/* Both sides of the Hermitian quadratic-form identity for a complex
 * kernel K (rows x cols) and complex vector f (length cols). */
cdm_status cdm_quadratic_form_check(const double* K, int64_t rows,
                                    int64_t cols, const double* f,
                                    double* lhs, double* rhs);

/* ------------------------------------------------------------------ */
/* Synthetic datasets.                                                 */

typedef struct cdm_dataset cdm_dataset;

/* 3x3 squared-distance matrix (row-major, length 9). */
cdm_status cdm_gen_three_point(double d_near, double d_far, double* out);

cdm_status cdm_gen_three_class(int32_t n_per, double eta, double alpha,
                               double beta, uint64_t seed, cdm_dataset** out);

cdm_status cdm_gen_noisy_sinusoids(const double* freqs, int64_t n_freqs,
                                   int32_t n_per, double eps,
                                   int32_t t_samples, double dt,
                                   uint64_t seed, cdm_dataset** out);

void cdm_dataset_free(cdm_dataset* dataset);

cdm_status cdm_dataset_dims(const cdm_dataset* dataset, int64_t* n,
                            int64_t* d);

/* Feature matrix, real n x d. */
cdm_status cdm_dataset_features(const cdm_dataset* dataset, double* out);

/* Class labels, length n. */
cdm_status cdm_dataset_labels(const cdm_dataset* dataset, int32_t* out);

/* Provenance string; owned by the dataset handle. */
const char* cdm_dataset_provenance(const cdm_dataset* dataset);

/* Symmetric blended relation matrix (three-class generator only),
 * real n x n. */
cdm_status cdm_dataset_relation(const cdm_dataset* dataset, double* out);

/* Delay stacking: X is T x C, out is (T-p+1) x (C*p). */
cdm_status cdm_stack_order_p(const double* X, int64_t t, int64_t c,
                             int32_t p, double* out);

/* ------------------------------------------------------------------ */
/* Alignment.                                                          */

/* Unitary Procrustes alignment of complex n x s embeddings. rotation is
 * complex s x s; ambiguous (may be NULL) is set to 1 when the optimum is
 * not unique. */
cdm_status cdm_procrustes_align(const double* E_i, const double* E_ref,
                                int64_t n, int64_t s, double* rotation,
                                double* residual, int32_t* ambiguous);

/* ------------------------------------------------------------------ */
/* Clustering and evaluation metrics.                                  */

/* Interleaves a complex n x s embedding into a real n x 2s matrix. */
cdm_status cdm_realify(const double* E, int64_t n, int64_t s, double* out);

/* k-means labels (length n); inertia may be NULL. */
cdm_status cdm_kmeans(const double* E, int64_t n, int64_t d, int32_t k,
                      uint64_t seed, int32_t* labels, double* inertia);

cdm_status cdm_clustering_accuracy(const int32_t* truth, const int32_t* pred,
                                   int64_t n, double* out);
cdm_status cdm_ari(const int32_t* truth, const int32_t* pred, int64_t n,
                   double* out);
cdm_status cdm_nmi(const int32_t* truth, const int32_t* pred, int64_t n,
                   double* out);

/* Scatter trace ratio; +inf when within-class scatter vanishes. */
cdm_status cdm_fdr(const double* E, int64_t n, int64_t d,
                   const int32_t* labels, double* out);

cdm_status cdm_classification_metrics(const int32_t* truth,
                                      const int32_t* pred, int64_t n,
                                      double* accuracy, double* macro_f1,
                                      double* kappa);

/* Pearson correlation matrix of columns; X is T x M, out is M x M. */
cdm_status cdm_fc(const double* X, int64_t t, int64_t m, double* out);

cdm_status cdm_fc_error(const double* FC, const double* FC_G, int64_t m,
                        double* out);
cdm_status cdm_fc_corr(const double* FC, const double* FC_G, int64_t m,
                       double* out);

/* Edge cofluctuation series (T x M(M-1)) and FCD (T x T); either output
 * pointer may be NULL to skip it. */
cdm_status cdm_edge_dynamics(const double* X, int64_t t, int64_t m,
                             double* edge_series, double* fcd);

/* Gaussian entropy of the FCD upper triangle; -inf when it is constant. */
cdm_status cdm_ecm_entropy(const double* fcd, int64_t t, double* out);

cdm_status cdm_ecm_corr(const double* h_source, const double* h_embed,
                        int64_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* CDM_C_H */
