/* vicloud - Rashomon sets, model reliance, and variable importance clouds.
 *
 * C interface to the vicloud core. All functions that can fail return a
 * vicl_status; on failure vicl_last_error() describes the problem (the
 * message is thread-local and valid until the next failing call on the same
 * thread). Objects are created behind opaque handles and released with the
 * matching *_free function. Strings returned through char** out-parameters
 * are heap-allocated; release them with vicl_string_free.
 */
#ifndef VICLOUD_H
#define VICLOUD_H

#include <stdint.h>

#if defined(_WIN32)
#define VICL_API __declspec(dllexport)
#else
#define VICL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vicl_status {
    VICL_OK = 0,
    VICL_ERR_CONFIG = 1, /* bad parameters or malformed specs */
    VICL_ERR_DATA = 2,   /* file, parse, or input-invariant problems */
    VICL_ERR_NUMERIC = 3 /* singular systems, degenerate geometry */
} vicl_status;

VICL_API const char* vicl_last_error(void);
VICL_API const char* vicl_version(void);
VICL_API void vicl_string_free(char* s);

typedef struct vicl_dataset vicl_dataset;
typedef struct vicl_cov vicl_cov;
typedef struct vicl_ellipsoid vicl_ellipsoid;
typedef struct vicl_cloud vicl_cloud;
typedef struct vicl_model vicl_model;
typedef struct vicl_tree_table vicl_tree_table;
typedef struct vicl_tree_cloud vicl_tree_cloud;

/* ------------------------------------------------------------------ data */

/* Reads a comma-delimited file with a header row. `outcome_column` selects
 * by name (or 0-based index as a fallback). With force_binary != 0, feature
 * values must be subsets of {0,1} and outcomes of {-1,+1}; otherwise binary
 * data is auto-detected by exact value-set matching. */
VICL_API vicl_status vicl_dataset_load_csv(const char* path, const char* outcome_column,
                                           int force_binary, vicl_dataset** out);

/* Builds a dataset from a JSON spec: {"corr_xx": [[..]], "corr_xy": [..],
 * "n": int, "seed": int} samples a unit Gaussian with those correlations;
 * {"cells": {"01": [pos, neg], ...}, "seed": int} builds exact-count binary
 * data. seed_override, when non-null, replaces the spec's seed. */
VICL_API vicl_status vicl_dataset_from_spec_json(const char* json,
                                                 const uint64_t* seed_override,
                                                 vicl_dataset** out);

VICL_API vicl_status vicl_dataset_gen_gaussian(int32_t p, const double* corr_xx_rowmajor,
                                               const double* corr_xy, int64_t n,
                                               uint64_t seed, vicl_dataset** out);

/* Columns rescaled to sample mean 0 and variance 1 (1/n convention). */
VICL_API vicl_status vicl_dataset_normalize(const vicl_dataset* d, vicl_dataset** out);

/* Outcome mapped to {-1,+1} by sign. */
VICL_API vicl_status vicl_dataset_binarize_outcome(const vicl_dataset* d,
                                                   vicl_dataset** out);

VICL_API vicl_status vicl_dataset_save_csv(const vicl_dataset* d, const char* path);
VICL_API int64_t vicl_dataset_rows(const vicl_dataset* d);
VICL_API int32_t vicl_dataset_cols(const vicl_dataset* d);
VICL_API int vicl_dataset_is_binary(const vicl_dataset* d);
/* Pointer owned by the dataset; valid until vicl_dataset_free. */
VICL_API const char* vicl_dataset_feature_name(const vicl_dataset* d, int32_t j);
VICL_API void vicl_dataset_free(vicl_dataset* d);

/* ------------------------------------------------------- second moments */

/* Empirical second moments of the data as-is (divide by n, no centering). */
VICL_API vicl_status vicl_cov_from_dataset(const vicl_dataset* d, vicl_cov** out);

/* Moments supplied directly (e.g. population targets of a synthetic spec). */
VICL_API vicl_status vicl_cov_create(int32_t p, const double* sigma_xx_rowmajor,
                                     const double* sigma_xy, double sigma_yy,
                                     int means_removed, vicl_cov** out);

VICL_API int32_t vicl_cov_dim(const vicl_cov* cov);
VICL_API vicl_status vicl_cov_to_json(const vicl_cov* cov, char** json_out);
VICL_API void vicl_cov_free(vicl_cov* cov);

/* ------------------------------------------------------- ridge geometry */

/* beta^T (sigma_xx + cI) beta - 2 sigma_xy^T beta + sigma_yy. */
VICL_API vicl_status vicl_ridge_loss(const vicl_cov* cov, double c, const double* beta,
                                     double* out);

/* Minimizer and (optionally) its loss; beta_out has length p. */
VICL_API vicl_status vicl_best_ridge(const vicl_cov* cov, double c, double* beta_out,
                                     double* loss_out /* nullable */);

/* Exact near-optimal coefficient ellipsoid at slack factor epsilon. */
VICL_API vicl_status vicl_rashomon_ellipsoid(const vicl_cov* cov, double c,
                                             double epsilon, vicl_ellipsoid** out);

VICL_API vicl_status vicl_contains_linear(const vicl_cov* cov, double c, double epsilon,
                                          const double* beta, int* contained_out);

/* ----------------------------------------------------------- ellipsoids */

VICL_API int32_t vicl_ellipsoid_dim(const vicl_ellipsoid* e);
VICL_API vicl_status vicl_ellipsoid_center(const vicl_ellipsoid* e, double* out);
VICL_API vicl_status vicl_ellipsoid_radii(const vicl_ellipsoid* e, double* out);
VICL_API vicl_status vicl_ellipsoid_rotation(const vicl_ellipsoid* e,
                                             double* rowmajor_out);
/* {"center": [..], "radii": [..], "rotation": [[..]] (row-major)} */
VICL_API vicl_status vicl_ellipsoid_to_json(const vicl_ellipsoid* e, char** json_out);
VICL_API void vicl_ellipsoid_free(vicl_ellipsoid* e);

/* -------------------------------------------------------- model reliance */

/* Analytic difference-form reliance of a linear model on feature j. */
VICL_API vicl_status vicl_mr_linear(const vicl_cov* cov, const double* beta, int32_t j,
                                    double* out);
VICL_API vicl_status vicl_mr_linear_vector(const vicl_cov* cov, const double* beta,
                                           double* out);

/* Squared-error linear model over p features (no intercept). */
VICL_API vicl_status vicl_model_linear(const double* beta, int32_t p, vicl_model** out);
/* Logistic model over p features; beta has length p + 1, intercept first. */
VICL_API vicl_status vicl_model_logistic(const double* beta_with_intercept, int32_t p,
                                         vicl_model** out);

/* Permutation estimate of reliance: mean loss over n_shuffles seeded column
 * permutations, combined as ratio (variant_ratio != 0) or difference. */
VICL_API vicl_status vicl_mr_permute(const vicl_model* m, const vicl_dataset* d,
                                     int32_t j, int variant_ratio, int n_shuffles,
                                     uint64_t seed, double* out);

/* Exact expected shuffled-loss ratio on binary data (force column to 1 and
 * to 0, blend by the frequency of ones). */
VICL_API vicl_status vicl_mr_binary_exact(const vicl_model* m, const vicl_dataset* d,
                                          int32_t j, double* out);
VICL_API void vicl_model_free(vicl_model* m);

/* ------------------------------------------------- linear reliance sets */

/* Closed-form reliance ellipsoid; requires uncorrelated features. */
VICL_API vicl_status vicl_vic_uncorrelated(const vicl_cov* cov, double c, double epsilon,
                                           vicl_ellipsoid** out);

/* Reliance ellipsoid from the first-order expansion of the reliance map at
 * beta_bar (the loss minimizer when beta_bar is null). */
VICL_API vicl_status vicl_vic_ellipsoid_approx(const vicl_cov* cov, double c,
                                               double epsilon, const double* beta_bar,
                                               vicl_ellipsoid** out);

/* Gradient matrix (p x p, row-major) and base reliance vector at beta_bar. */
VICL_API vicl_status vicl_mr_jacobian(const vicl_cov* cov, const double* beta_bar,
                                      double* matrix_rowmajor_out, double* base_mr_out);

/* Linearized inverse reliance map expanded at beta_bar. */
VICL_API vicl_status vicl_mr_inverse_approx(const vicl_cov* cov, const double* beta_bar,
                                            const double* mr, double* beta_out);

/* Bound on the dropped quadratic term over the box |t_k| <= box_radii[k]. */
VICL_API vicl_status vicl_vic_error_bound(const vicl_cov* cov, int32_t j,
                                          const double* box_radii, double* out);

/* Half-widths of the coefficient ellipsoid's axis-aligned bounding box. */
VICL_API vicl_status vicl_rashomon_box_radii(const vicl_cov* cov, double c,
                                             double epsilon, double* out);

/* Samples the coefficient set (n_boundary on the surface, n_interior inside)
 * and maps every point through the analytic reliance vector. */
VICL_API vicl_status vicl_vic_forward_map(const vicl_cov* cov, double c, double epsilon,
                                          int n_boundary, int n_interior, uint64_t seed,
                                          vicl_cloud** out);

/* Newton solve of mr(beta) = mr from the linearized inverse; reports whether
 * the solution lies in the near-optimal set. */
VICL_API vicl_status vicl_vic_membership(const vicl_cov* cov, double c, double epsilon,
                                         const double* mr, int* converged_out,
                                         double* beta_out, int* contained_out);

/* ---------------------------------------------------------------- clouds */

VICL_API int64_t vicl_cloud_size(const vicl_cloud* c);
VICL_API int32_t vicl_cloud_mr_dim(const vicl_cloud* c);
VICL_API int32_t vicl_cloud_beta_dim(const vicl_cloud* c);
VICL_API vicl_status vicl_cloud_point(const vicl_cloud* c, int64_t i,
                                      double* beta_out /* nullable */,
                                      double* mr_out /* nullable */,
                                      double* loss_out /* nullable */);
VICL_API vicl_status vicl_cloud_set_names(vicl_cloud* c, const char* const* names,
                                          int32_t count);
/* CSV: loss, coefficients, reliance values; optional provenance sidecar. */
VICL_API vicl_status vicl_cloud_save(const vicl_cloud* c, const char* csv_path,
                                     const char* provenance_json_path /* nullable */);
/* Reads back any CSV with mr_* columns (cloud or tree-cloud exports). */
VICL_API vicl_status vicl_cloud_load_csv(const char* path, vicl_cloud** out);
/* "feature,upper,lower" rows sorted by upper bound descending. */
VICL_API vicl_status vicl_cloud_bounds_csv(const vicl_cloud* c, char** csv_out);
/* Lloyd iteration with seeded k-means++ start; labels_out has size() slots. */
VICL_API vicl_status vicl_cloud_kmeans(const vicl_cloud* c, int k, uint64_t seed,
                                       int32_t* labels_out);
/* Pairwise scatter grid over the selected features (0-based indices into the
 * reliance vector). svg != 0 renders SVG 1.1, otherwise long-format CSV. */
VICL_API vicl_status vicl_cloud_render_vid(const vicl_cloud* c, const int32_t* features,
                                           int32_t n_features,
                                           const int32_t* labels /* nullable */,
                                           int svg, char** out);
VICL_API void vicl_cloud_free(vicl_cloud* c);

/* -------------------------------------------------------------- logistic */

typedef struct vicl_sampler_config {
    int n_per_round;        /* draws per round (N) */
    double box_scale;       /* <= 0: tune towards 75% initial survival */
    double r;               /* ellipsoid inflation factor, > 1 */
    int m_rounds;           /* refit rounds (M) */
    double r_bar;           /* diagnostic inflation bound, >= r */
    uint64_t seed;
    int mr_shuffles;        /* permutations per feature for reliance */
    double radial_exponent; /* radial draw is uniform^exponent */
} vicl_sampler_config;

VICL_API void vicl_sampler_config_default(vicl_sampler_config* cfg);

/* Sum over rows of log(1 + exp(-y_i (b0 + x_i . b))); outcomes must be +-1. */
VICL_API vicl_status vicl_logistic_loss(const vicl_dataset* d,
                                        const double* beta_with_intercept, double* out);

/* Newton fit; beta_out has length p + 1 (intercept first). Standard errors
 * come from the inverse Hessian at the optimum. */
VICL_API vicl_status vicl_fit_logistic(const vicl_dataset* d, double tol, int max_iter,
                                       double* beta_out, double* loss_out,
                                       double* se_out /* nullable */);

/* Box sampling, elimination, and M rounds of refit/resample; returns the
 * final survivors with ratio-variant reliance vectors plus a JSON report
 * (rounds, survival rate, final ellipsoid). */
VICL_API vicl_status vicl_sample_rashomon_logistic(const vicl_dataset* d, double epsilon,
                                                   const vicl_sampler_config* cfg,
                                                   vicl_cloud** cloud_out,
                                                   char** report_json_out /* nullable */);

/* Runs the sampler for every (r, M) candidate pair and picks the smallest
 * plateau; emits the survival table as CSV ("r,M,survival_rate"). */
VICL_API vicl_status vicl_tune_sampler(const vicl_dataset* d, double epsilon,
                                       const double* r_candidates, int n_r,
                                       const int* m_candidates, int n_m, double r_bar,
                                       const vicl_sampler_config* cfg,
                                       double stability_threshold, double* chosen_r_out,
                                       int* chosen_m_out,
                                       char** table_csv_out /* nullable */);

/* ----------------------------------------------------------------- trees */

/* Outcome tally over the 2^m patterns of the selected binary features
 * (0-based indices, m <= 20). */
VICL_API vicl_status vicl_tree_table_create(const vicl_dataset* d, const int32_t* subset,
                                            int32_t m, vicl_tree_table** out);
VICL_API vicl_status vicl_tree_table_info(const vicl_tree_table* t, uint32_t* n_cells_out,
                                          double* best_loss_out);
VICL_API vicl_status vicl_tree_table_cell(const vicl_tree_table* t, uint32_t pattern,
                                          int64_t* pos_out, int64_t* neg_out,
                                          int64_t* gap_out, int* majority_out);
/* Ratio reliance of the majority table on feature j (dataset indexing). */
VICL_API vicl_status vicl_tree_mr_best(const vicl_tree_table* t, int32_t j, double* out);
/* Interval containing the reliance change caused by flipping one cell. */
VICL_API vicl_status vicl_tree_shift_interval(const vicl_tree_table* t, uint32_t pattern,
                                              int32_t j, double mr_star_j, double* lo_out,
                                              double* hi_out);
/* Exact reliance change caused by flipping one cell of the majority table. */
VICL_API vicl_status vicl_tree_shift_exact(const vicl_tree_table* t, uint32_t pattern,
                                           int32_t j, double* out);
VICL_API void vicl_tree_table_free(vicl_tree_table* t);

/* Enumerates near-optimal decision tables over every feature subset of size
 * <= max_features (global best loss as the benchmark), one row per distinct
 * predictive function, with exact ratio reliance vectors. */
VICL_API vicl_status vicl_tree_rashomon(const vicl_dataset* d, double epsilon,
                                        int max_features, vicl_tree_cloud** out);
VICL_API int64_t vicl_tree_cloud_size(const vicl_tree_cloud* c);
VICL_API vicl_status vicl_tree_cloud_entry(const vicl_tree_cloud* c, int64_t i,
                                           int32_t* subset_id_out, uint64_t* flips_out,
                                           double* loss_out, double* mr_out);
/* "subset_id,subset,flips,loss,mr_1..mr_p" rows. */
VICL_API vicl_status vicl_tree_cloud_csv(const vicl_tree_cloud* c, char** csv_out);
/* Reliance-only cloud view for VID rendering, bounds, and clustering. */
VICL_API vicl_status vicl_tree_cloud_as_cloud(const vicl_tree_cloud* c, vicl_cloud** out);
VICL_API void vicl_tree_cloud_free(vicl_tree_cloud* c);

/* ------------------------------------------------------------- inference */

/* Empirical reliance of a linear model (sample covariances, 1/n). */
VICL_API vicl_status vicl_mr_empirical_quadratic(const vicl_dataset* d,
                                                 const double* beta, int32_t j,
                                                 double* out);

/* Heteroskedasticity-robust covariance of the least-squares coefficients. */
VICL_API vicl_status vicl_sandwich_variance(const vicl_dataset* d, double* rowmajor_out);

/* Wald test of H0: population reliance of the least-squares model on
 * feature j equals null_value. json_out (when non-null) receives
 * {"feature", "mr_hat", "sigma_hat", "z_stat", "p_value", "n"}. */
VICL_API vicl_status vicl_mr_wald(const vicl_dataset* d, int32_t j, double null_value,
                                  double* mr_hat_out, double* sigma_hat_out,
                                  double* z_out, double* p_out,
                                  char** json_out /* nullable */);

/* ------------------------------------------------------------------ misc */

/* FNV-1a 64 content hash of a file, hex-encoded. */
VICL_API vicl_status vicl_file_hash(const char* path, char** hex_out);
/* Label-derived seed stream: new stages never perturb existing ones. */
VICL_API uint64_t vicl_label_seed(const char* label, uint64_t master);

#ifdef __cplusplus
}
#endif
#endif /* VICLOUD_H */
