#include "vicloud.h"

#include <cstring>
#include <memory>
#include <string>

#include "core/inference.hpp"
#include "core/linear.hpp"
#include "core/logistic.hpp"
#include "core/rng.hpp"
#include "core/serialize.hpp"
#include "core/tree.hpp"
#include "core/vic.hpp"
#include "core/vid.hpp"

struct vicl_dataset {
    vicloud::Dataset value;
};
struct vicl_cov {
    vicloud::CovarianceStructure value;
};
struct vicl_ellipsoid {
    vicloud::Ellipsoid value;
};
struct vicl_cloud {
    vicloud::VICCloud value;
};
struct vicl_model {
    std::unique_ptr<vicloud::Predictor> value;
};
struct vicl_tree_table {
    vicloud::CellTable value;
    std::vector<std::string> feature_names;
};
struct vicl_tree_cloud {
    vicloud::TreeCloud value;
};

namespace {

thread_local std::string g_last_error;

vicl_status status_of(vicloud::ErrorKind kind) {
    switch (kind) {
        case vicloud::ErrorKind::config: return VICL_ERR_CONFIG;
        case vicloud::ErrorKind::data: return VICL_ERR_DATA;
        case vicloud::ErrorKind::numeric: return VICL_ERR_NUMERIC;
    }
    return VICL_ERR_NUMERIC;
}

template <typename F>
vicl_status wrap(F&& body) {
    try {
        body();
        return VICL_OK;
    } catch (const vicloud::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return VICL_ERR_NUMERIC;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require_handle(const void* handle, const char* what) {
    vicloud::require(handle != nullptr, vicloud::ErrorKind::config,
                     std::string(what) + ": null handle");
}

vicloud::Vector to_vector(const double* data, Eigen::Index n) {
    vicloud::require(data != nullptr, vicloud::ErrorKind::config, "null array argument");
    vicloud::Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = data[i];
    return v;
}

vicloud::Matrix to_matrix(const double* rowmajor, Eigen::Index rows, Eigen::Index cols) {
    vicloud::require(rowmajor != nullptr, vicloud::ErrorKind::config,
                     "null matrix argument");
    vicloud::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rowmajor[i * cols + j];
    return m;
}

vicloud::SamplerConfig to_config(const vicl_sampler_config* cfg) {
    require_handle(cfg, "sampler config");
    vicloud::SamplerConfig out;
    out.n_per_round = cfg->n_per_round;
    out.box_scale = cfg->box_scale;
    out.r = cfg->r;
    out.m_rounds = cfg->m_rounds;
    out.r_bar = cfg->r_bar;
    out.seed = cfg->seed;
    out.mr_shuffles = cfg->mr_shuffles;
    out.radial_exponent = cfg->radial_exponent;
    return out;
}

}  // namespace

extern "C" {

const char* vicl_last_error(void) { return g_last_error.c_str(); }

const char* vicl_version(void) { return "0.1.0"; }

void vicl_string_free(char* s) { delete[] s; }

/* ---------------------------------------------------------------- data */

vicl_status vicl_dataset_load_csv(const char* path, const char* outcome_column,
                                  int force_binary, vicl_dataset** out) {
    return wrap([&] {
        require_handle(path, "path");
        require_handle(outcome_column, "outcome column");
        require_handle(out, "out");
        *out = new vicl_dataset{vicloud::load_csv(path, outcome_column, force_binary != 0)};
    });
}

vicl_status vicl_dataset_from_spec_json(const char* json, const uint64_t* seed_override,
                                        vicl_dataset** out) {
    return wrap([&] {
        require_handle(json, "spec json");
        require_handle(out, "out");
        *out = new vicl_dataset{vicloud::dataset_from_spec_json(
            json, seed_override ? *seed_override : 0, seed_override != nullptr)};
    });
}

vicl_status vicl_dataset_gen_gaussian(int32_t p, const double* corr_xx_rowmajor,
                                      const double* corr_xy, int64_t n, uint64_t seed,
                                      vicl_dataset** out) {
    return wrap([&] {
        require_handle(out, "out");
        *out = new vicl_dataset{vicloud::gen_gaussian(to_matrix(corr_xx_rowmajor, p, p),
                                                      to_vector(corr_xy, p), n, seed)};
    });
}

vicl_status vicl_dataset_normalize(const vicl_dataset* d, vicl_dataset** out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(out, "out");
        *out = new vicl_dataset{vicloud::normalize(d->value)};
    });
}

vicl_status vicl_dataset_binarize_outcome(const vicl_dataset* d, vicl_dataset** out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(out, "out");
        *out = new vicl_dataset{vicloud::binarize_outcome(d->value)};
    });
}

vicl_status vicl_dataset_save_csv(const vicl_dataset* d, const char* path) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(path, "path");
        vicloud::save_csv(d->value, path);
    });
}

int64_t vicl_dataset_rows(const vicl_dataset* d) { return d ? d->value.n() : -1; }

int32_t vicl_dataset_cols(const vicl_dataset* d) {
    return d ? static_cast<int32_t>(d->value.p()) : -1;
}

int vicl_dataset_is_binary(const vicl_dataset* d) {
    return d && d->value.kind == vicloud::DataKind::binary_pm1 ? 1 : 0;
}

const char* vicl_dataset_feature_name(const vicl_dataset* d, int32_t j) {
    if (!d || j < 0 || j >= static_cast<int32_t>(d->value.names.size())) return nullptr;
    return d->value.names[static_cast<std::size_t>(j)].c_str();
}

void vicl_dataset_free(vicl_dataset* d) { delete d; }

/* ------------------------------------------------------ second moments */

vicl_status vicl_cov_from_dataset(const vicl_dataset* d, vicl_cov** out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(out, "out");
        *out = new vicl_cov{vicloud::covariance_of(d->value)};
    });
}

vicl_status vicl_cov_create(int32_t p, const double* sigma_xx_rowmajor,
                            const double* sigma_xy, double sigma_yy, int means_removed,
                            vicl_cov** out) {
    return wrap([&] {
        require_handle(out, "out");
        *out = new vicl_cov{vicloud::CovarianceStructure::create(
            to_matrix(sigma_xx_rowmajor, p, p), to_vector(sigma_xy, p), sigma_yy,
            means_removed != 0)};
    });
}

int32_t vicl_cov_dim(const vicl_cov* cov) {
    return cov ? static_cast<int32_t>(cov->value.p()) : -1;
}

vicl_status vicl_cov_to_json(const vicl_cov* cov, char** json_out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(json_out, "out");
        *json_out = dup_string(vicloud::covariance_to_json(cov->value));
    });
}

void vicl_cov_free(vicl_cov* cov) { delete cov; }

/* ------------------------------------------------------ ridge geometry */

vicl_status vicl_ridge_loss(const vicl_cov* cov, double c, const double* beta,
                            double* out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        *out = vicloud::ridge_loss(to_vector(beta, cov->value.p()), cov->value, c);
    });
}

vicl_status vicl_best_ridge(const vicl_cov* cov, double c, double* beta_out,
                            double* loss_out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(beta_out, "out");
        const vicloud::Vector beta = vicloud::best_ridge(cov->value, c);
        for (Eigen::Index i = 0; i < beta.size(); ++i) beta_out[i] = beta[i];
        if (loss_out) *loss_out = vicloud::ridge_loss(beta, cov->value, c);
    });
}

vicl_status vicl_rashomon_ellipsoid(const vicl_cov* cov, double c, double epsilon,
                                    vicl_ellipsoid** out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        *out = new vicl_ellipsoid{
            vicloud::rashomon_ellipsoid_linear({cov->value, c, epsilon})};
    });
}

vicl_status vicl_contains_linear(const vicl_cov* cov, double c, double epsilon,
                                 const double* beta, int* contained_out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(contained_out, "out");
        *contained_out = vicloud::contains_linear(to_vector(beta, cov->value.p()),
                                                  {cov->value, c, epsilon})
                             ? 1
                             : 0;
    });
}

/* ---------------------------------------------------------- ellipsoids */

int32_t vicl_ellipsoid_dim(const vicl_ellipsoid* e) {
    return e ? static_cast<int32_t>(e->value.dim()) : -1;
}

vicl_status vicl_ellipsoid_center(const vicl_ellipsoid* e, double* out) {
    return wrap([&] {
        require_handle(e, "ellipsoid");
        require_handle(out, "out");
        for (Eigen::Index i = 0; i < e->value.dim(); ++i) out[i] = e->value.center[i];
    });
}

vicl_status vicl_ellipsoid_radii(const vicl_ellipsoid* e, double* out) {
    return wrap([&] {
        require_handle(e, "ellipsoid");
        require_handle(out, "out");
        for (Eigen::Index i = 0; i < e->value.dim(); ++i) out[i] = e->value.radii[i];
    });
}

vicl_status vicl_ellipsoid_rotation(const vicl_ellipsoid* e, double* rowmajor_out) {
    return wrap([&] {
        require_handle(e, "ellipsoid");
        require_handle(rowmajor_out, "out");
        const Eigen::Index p = e->value.dim();
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                rowmajor_out[i * p + j] = e->value.rotation(i, j);
    });
}

vicl_status vicl_ellipsoid_to_json(const vicl_ellipsoid* e, char** json_out) {
    return wrap([&] {
        require_handle(e, "ellipsoid");
        require_handle(json_out, "out");
        *json_out = dup_string(vicloud::ellipsoid_to_json(e->value));
    });
}

void vicl_ellipsoid_free(vicl_ellipsoid* e) { delete e; }

/* ------------------------------------------------------- model reliance */

vicl_status vicl_mr_linear(const vicl_cov* cov, const double* beta, int32_t j,
                           double* out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        *out = vicloud::mr_linear(to_vector(beta, cov->value.p()), cov->value, j);
    });
}

vicl_status vicl_mr_linear_vector(const vicl_cov* cov, const double* beta, double* out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        const vicloud::Vector mr =
            vicloud::mr_linear_vector(to_vector(beta, cov->value.p()), cov->value);
        for (Eigen::Index i = 0; i < mr.size(); ++i) out[i] = mr[i];
    });
}

vicl_status vicl_model_linear(const double* beta, int32_t p, vicl_model** out) {
    return wrap([&] {
        require_handle(out, "out");
        *out = new vicl_model{
            std::make_unique<vicloud::LinearPredictor>(to_vector(beta, p))};
    });
}

vicl_status vicl_model_logistic(const double* beta_with_intercept, int32_t p,
                                vicl_model** out) {
    return wrap([&] {
        require_handle(out, "out");
        *out = new vicl_model{std::make_unique<vicloud::LogisticPredictor>(
            to_vector(beta_with_intercept, p + 1))};
    });
}

vicl_status vicl_mr_permute(const vicl_model* m, const vicl_dataset* d, int32_t j,
                            int variant_ratio, int n_shuffles, uint64_t seed,
                            double* out) {
    return wrap([&] {
        require_handle(m, "model");
        require_handle(d, "dataset");
        require_handle(out, "out");
        *out = vicloud::mr_empirical_permute(
            *m->value, d->value, j, n_shuffles, seed,
            variant_ratio ? vicloud::MRVariant::ratio : vicloud::MRVariant::diff);
    });
}

vicl_status vicl_mr_binary_exact(const vicl_model* m, const vicl_dataset* d, int32_t j,
                                 double* out) {
    return wrap([&] {
        require_handle(m, "model");
        require_handle(d, "dataset");
        require_handle(out, "out");
        *out = vicloud::mr_binary_exact(*m->value, d->value, j);
    });
}

void vicl_model_free(vicl_model* m) { delete m; }

/* ------------------------------------------------ linear reliance sets */

vicl_status vicl_vic_uncorrelated(const vicl_cov* cov, double c, double epsilon,
                                  vicl_ellipsoid** out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        *out = new vicl_ellipsoid{
            vicloud::vic_center_radii_uncorrelated(cov->value, c, epsilon)};
    });
}

vicl_status vicl_vic_ellipsoid_approx(const vicl_cov* cov, double c, double epsilon,
                                      const double* beta_bar, vicl_ellipsoid** out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        std::optional<vicloud::Vector> expansion;
        if (beta_bar) expansion = to_vector(beta_bar, cov->value.p());
        *out = new vicl_ellipsoid{
            vicloud::vic_ellipsoid_approx({cov->value, c, epsilon}, expansion)};
    });
}

vicl_status vicl_mr_jacobian(const vicl_cov* cov, const double* beta_bar,
                             double* matrix_rowmajor_out, double* base_mr_out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(matrix_rowmajor_out, "out");
        const vicloud::JacobianMR jac =
            vicloud::jacobian_mr(to_vector(beta_bar, cov->value.p()), cov->value);
        const Eigen::Index p = cov->value.p();
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                matrix_rowmajor_out[i * p + j] = jac.matrix(i, j);
        if (base_mr_out)
            for (Eigen::Index i = 0; i < p; ++i) base_mr_out[i] = jac.base_mr[i];
    });
}

vicl_status vicl_mr_inverse_approx(const vicl_cov* cov, const double* beta_bar,
                                   const double* mr, double* beta_out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(beta_out, "out");
        const vicloud::JacobianMR jac =
            vicloud::jacobian_mr(to_vector(beta_bar, cov->value.p()), cov->value);
        const vicloud::Vector beta =
            vicloud::mr_inverse_approx(to_vector(mr, cov->value.p()), jac);
        for (Eigen::Index i = 0; i < beta.size(); ++i) beta_out[i] = beta[i];
    });
}

vicl_status vicl_vic_error_bound(const vicl_cov* cov, int32_t j, const double* box_radii,
                                 double* out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        *out = vicloud::approx_error_bound(j, to_vector(box_radii, cov->value.p()),
                                           cov->value);
    });
}

vicl_status vicl_rashomon_box_radii(const vicl_cov* cov, double c, double epsilon,
                                    double* out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        const vicloud::Vector radii =
            vicloud::rashomon_box_radii({cov->value, c, epsilon});
        for (Eigen::Index i = 0; i < radii.size(); ++i) out[i] = radii[i];
    });
}

vicl_status vicl_vic_forward_map(const vicl_cov* cov, double c, double epsilon,
                                 int n_boundary, int n_interior, uint64_t seed,
                                 vicl_cloud** out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        require_handle(out, "out");
        *out = new vicl_cloud{vicloud::vic_forward_map({cov->value, c, epsilon},
                                                       n_boundary, n_interior, seed)};
    });
}

vicl_status vicl_vic_membership(const vicl_cov* cov, double c, double epsilon,
                                const double* mr, int* converged_out, double* beta_out,
                                int* contained_out) {
    return wrap([&] {
        require_handle(cov, "covariance");
        const vicloud::MembershipDiagnostic diag = vicloud::vic_membership_diagnostic(
            to_vector(mr, cov->value.p()), {cov->value, c, epsilon});
        if (converged_out) *converged_out = diag.converged ? 1 : 0;
        if (contained_out) *contained_out = diag.contained ? 1 : 0;
        if (beta_out)
            for (Eigen::Index i = 0; i < diag.beta.size(); ++i) beta_out[i] = diag.beta[i];
    });
}

/* --------------------------------------------------------------- clouds */

int64_t vicl_cloud_size(const vicl_cloud* c) { return c ? c->value.size() : -1; }

int32_t vicl_cloud_mr_dim(const vicl_cloud* c) {
    return c ? static_cast<int32_t>(c->value.mr_dim()) : -1;
}

int32_t vicl_cloud_beta_dim(const vicl_cloud* c) {
    if (!c || c->value.points.empty()) return c ? 0 : -1;
    return static_cast<int32_t>(c->value.points.front().beta.size());
}

vicl_status vicl_cloud_point(const vicl_cloud* c, int64_t i, double* beta_out,
                             double* mr_out, double* loss_out) {
    return wrap([&] {
        require_handle(c, "cloud");
        vicloud::require(i >= 0 && i < c->value.size(), vicloud::ErrorKind::config,
                         "cloud: point index out of range");
        const auto& pt = c->value.points[static_cast<std::size_t>(i)];
        if (beta_out)
            for (Eigen::Index k = 0; k < pt.beta.size(); ++k) beta_out[k] = pt.beta[k];
        if (mr_out)
            for (Eigen::Index k = 0; k < pt.mr.size(); ++k) mr_out[k] = pt.mr[k];
        if (loss_out) *loss_out = pt.loss;
    });
}

vicl_status vicl_cloud_set_names(vicl_cloud* c, const char* const* names, int32_t count) {
    return wrap([&] {
        require_handle(c, "cloud");
        require_handle(names, "names");
        vicloud::require(count == static_cast<int32_t>(c->value.mr_dim()),
                         vicloud::ErrorKind::config, "cloud: name count mismatch");
        c->value.feature_names.assign(names, names + count);
    });
}

vicl_status vicl_cloud_save(const vicl_cloud* c, const char* csv_path,
                            const char* provenance_json_path) {
    return wrap([&] {
        require_handle(c, "cloud");
        require_handle(csv_path, "path");
        vicloud::write_text_file(csv_path, vicloud::cloud_to_csv(c->value));
        if (provenance_json_path)
            vicloud::write_text_file(provenance_json_path,
                                     vicloud::cloud_provenance_json(c->value));
    });
}

vicl_status vicl_cloud_load_csv(const char* path, vicl_cloud** out) {
    return wrap([&] {
        require_handle(path, "path");
        require_handle(out, "out");
        *out = new vicl_cloud{vicloud::cloud_from_csv(path)};
    });
}

vicl_status vicl_cloud_bounds_csv(const vicl_cloud* c, char** csv_out) {
    return wrap([&] {
        require_handle(c, "cloud");
        require_handle(csv_out, "out");
        *csv_out = dup_string(vicloud::bounds_table_csv(
            vicloud::bounds_table(c->value.mr_matrix(), c->value.feature_names)));
    });
}

vicl_status vicl_cloud_kmeans(const vicl_cloud* c, int k, uint64_t seed,
                              int32_t* labels_out) {
    return wrap([&] {
        require_handle(c, "cloud");
        require_handle(labels_out, "out");
        const vicloud::KMeansResult result =
            vicloud::cluster_kmeans(c->value.mr_matrix(), k, seed);
        for (std::size_t i = 0; i < result.labels.size(); ++i)
            labels_out[i] = result.labels[i];
    });
}

vicl_status vicl_cloud_render_vid(const vicl_cloud* c, const int32_t* features,
                                  int32_t n_features, const int32_t* labels, int svg,
                                  char** out) {
    return wrap([&] {
        require_handle(c, "cloud");
        require_handle(features, "features");
        require_handle(out, "out");
        std::vector<Eigen::Index> selected(features, features + n_features);
        vicloud::VIDGrid grid = vicloud::project_pairs(c->value.mr_matrix(),
                                                       c->value.feature_names, selected);
        if (labels)
            grid.cluster_labels.assign(labels, labels + c->value.size());
        *out = dup_string(svg ? vicloud::render_vid_svg(grid)
                              : vicloud::render_vid_csv(grid));
    });
}

void vicl_cloud_free(vicl_cloud* c) { delete c; }

/* ------------------------------------------------------------- logistic */

void vicl_sampler_config_default(vicl_sampler_config* cfg) {
    if (!cfg) return;
    cfg->n_per_round = 500;
    cfg->box_scale = 0.0;
    cfg->r = 1.2;
    cfg->m_rounds = 3;
    cfg->r_bar = 2.0;
    cfg->seed = 0;
    cfg->mr_shuffles = 20;
    cfg->radial_exponent = 1.0;
}

vicl_status vicl_logistic_loss(const vicl_dataset* d, const double* beta_with_intercept,
                               double* out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(out, "out");
        *out = vicloud::logistic_loss(to_vector(beta_with_intercept, d->value.p() + 1),
                                      d->value);
    });
}

vicl_status vicl_fit_logistic(const vicl_dataset* d, double tol, int max_iter,
                              double* beta_out, double* loss_out, double* se_out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(beta_out, "out");
        const vicloud::LogisticFit fit = vicloud::fit_logistic(d->value, tol, max_iter);
        for (Eigen::Index i = 0; i < fit.beta.size(); ++i) beta_out[i] = fit.beta[i];
        if (loss_out) *loss_out = fit.loss;
        if (se_out)
            for (Eigen::Index i = 0; i < fit.standard_errors.size(); ++i)
                se_out[i] = fit.standard_errors[i];
    });
}

vicl_status vicl_sample_rashomon_logistic(const vicl_dataset* d, double epsilon,
                                          const vicl_sampler_config* cfg,
                                          vicl_cloud** cloud_out,
                                          char** report_json_out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(cloud_out, "out");
        auto [cloud, report] =
            vicloud::sample_rashomon_logistic(d->value, epsilon, to_config(cfg));
        *cloud_out = new vicl_cloud{std::move(cloud)};
        if (report_json_out)
            *report_json_out = dup_string(vicloud::sampler_report_to_json(report));
    });
}

vicl_status vicl_tune_sampler(const vicl_dataset* d, double epsilon,
                              const double* r_candidates, int n_r,
                              const int* m_candidates, int n_m, double r_bar,
                              const vicl_sampler_config* cfg, double stability_threshold,
                              double* chosen_r_out, int* chosen_m_out,
                              char** table_csv_out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(r_candidates, "r candidates");
        require_handle(m_candidates, "m candidates");
        const vicloud::TuneResult tuned = vicloud::tune_sampler(
            d->value, epsilon, std::vector<double>(r_candidates, r_candidates + n_r),
            std::vector<int>(m_candidates, m_candidates + n_m), r_bar, to_config(cfg),
            stability_threshold > 0.0 ? stability_threshold : 0.02);
        if (chosen_r_out) *chosen_r_out = tuned.chosen_r;
        if (chosen_m_out) *chosen_m_out = tuned.chosen_m;
        if (table_csv_out) *table_csv_out = dup_string(vicloud::tune_table_csv(tuned));
    });
}

/* ---------------------------------------------------------------- trees */

vicl_status vicl_tree_table_create(const vicl_dataset* d, const int32_t* subset,
                                   int32_t m, vicl_tree_table** out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(out, "out");
        std::vector<Eigen::Index> features;
        if (m > 0) {
            require_handle(subset, "subset");
            features.assign(subset, subset + m);
        }
        *out = new vicl_tree_table{vicloud::tabulate_cells(d->value, features),
                                   d->value.names};
    });
}

vicl_status vicl_tree_table_info(const vicl_tree_table* t, uint32_t* n_cells_out,
                                 double* best_loss_out) {
    return wrap([&] {
        require_handle(t, "table");
        if (n_cells_out) *n_cells_out = t->value.n_cells();
        if (best_loss_out) *best_loss_out = t->value.total_best_loss;
    });
}

vicl_status vicl_tree_table_cell(const vicl_tree_table* t, uint32_t pattern,
                                 int64_t* pos_out, int64_t* neg_out, int64_t* gap_out,
                                 int* majority_out) {
    return wrap([&] {
        require_handle(t, "table");
        vicloud::require(pattern < t->value.n_cells(), vicloud::ErrorKind::config,
                         "tree: pattern out of range");
        const vicloud::Cell& cell = t->value.cells[pattern];
        if (pos_out) *pos_out = cell.count_pos;
        if (neg_out) *neg_out = cell.count_neg;
        if (gap_out) *gap_out = cell.gap;
        if (majority_out) *majority_out = cell.majority_label;
    });
}

vicl_status vicl_tree_mr_best(const vicl_tree_table* t, int32_t j, double* out) {
    return wrap([&] {
        require_handle(t, "table");
        require_handle(out, "out");
        *out = vicloud::tree_mr_exact(t->value, vicloud::best_tree(t->value), j);
    });
}

vicl_status vicl_tree_shift_interval(const vicl_tree_table* t, uint32_t pattern,
                                     int32_t j, double mr_star_j, double* lo_out,
                                     double* hi_out) {
    return wrap([&] {
        require_handle(t, "table");
        const auto [lo, hi] =
            vicloud::mr_shift_single_flip(t->value, pattern, j, mr_star_j);
        if (lo_out) *lo_out = lo;
        if (hi_out) *hi_out = hi;
    });
}

vicl_status vicl_tree_shift_exact(const vicl_tree_table* t, uint32_t pattern, int32_t j,
                                  double* out) {
    return wrap([&] {
        require_handle(t, "table");
        require_handle(out, "out");
        vicloud::require(pattern < t->value.n_cells(), vicloud::ErrorKind::config,
                         "tree: pattern out of range");
        const vicloud::FlipTree best = vicloud::best_tree(t->value);
        vicloud::FlipTree flipped;
        flipped.flipped_cells = {pattern};
        flipped.loss = t->value.total_best_loss +
                       static_cast<double>(t->value.cells[pattern].gap);
        *out = vicloud::tree_mr_exact(t->value, flipped, j) -
               vicloud::tree_mr_exact(t->value, best, j);
    });
}

void vicl_tree_table_free(vicl_tree_table* t) { delete t; }

vicl_status vicl_tree_rashomon(const vicl_dataset* d, double epsilon, int max_features,
                               vicl_tree_cloud** out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(out, "out");
        *out =
            new vicl_tree_cloud{vicloud::tree_rashomon_scan(d->value, epsilon, max_features)};
    });
}

int64_t vicl_tree_cloud_size(const vicl_tree_cloud* c) {
    return c ? static_cast<int64_t>(c->value.entries.size()) : -1;
}

vicl_status vicl_tree_cloud_entry(const vicl_tree_cloud* c, int64_t i,
                                  int32_t* subset_id_out, uint64_t* flips_out,
                                  double* loss_out, double* mr_out) {
    return wrap([&] {
        require_handle(c, "tree cloud");
        vicloud::require(i >= 0 && i < static_cast<int64_t>(c->value.entries.size()),
                         vicloud::ErrorKind::config, "tree cloud: index out of range");
        const auto& entry = c->value.entries[static_cast<std::size_t>(i)];
        if (subset_id_out) *subset_id_out = entry.subset_id;
        if (flips_out) *flips_out = entry.flip_mask;
        if (loss_out) *loss_out = entry.loss;
        if (mr_out)
            for (Eigen::Index k = 0; k < entry.mr.size(); ++k) mr_out[k] = entry.mr[k];
    });
}

vicl_status vicl_tree_cloud_csv(const vicl_tree_cloud* c, char** csv_out) {
    return wrap([&] {
        require_handle(c, "tree cloud");
        require_handle(csv_out, "out");
        *csv_out = dup_string(vicloud::tree_cloud_to_csv(c->value));
    });
}

vicl_status vicl_tree_cloud_as_cloud(const vicl_tree_cloud* c, vicl_cloud** out) {
    return wrap([&] {
        require_handle(c, "tree cloud");
        require_handle(out, "out");
        vicloud::VICCloud cloud;
        cloud.model_class = "tree";
        cloud.variant = vicloud::MRVariant::ratio;
        cloud.epsilon = c->value.epsilon;
        cloud.feature_names = c->value.feature_names;
        cloud.points.reserve(c->value.entries.size());
        for (const auto& entry : c->value.entries) {
            vicloud::ReliancePoint pt;
            pt.mr = entry.mr;
            pt.loss = entry.loss;
            cloud.points.push_back(std::move(pt));
        }
        *out = new vicl_cloud{std::move(cloud)};
    });
}

void vicl_tree_cloud_free(vicl_tree_cloud* c) { delete c; }

/* ------------------------------------------------------------ inference */

vicl_status vicl_mr_empirical_quadratic(const vicl_dataset* d, const double* beta,
                                        int32_t j, double* out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(out, "out");
        *out = vicloud::empirical_mr_quadratic(to_vector(beta, d->value.p()), d->value, j);
    });
}

vicl_status vicl_sandwich_variance(const vicl_dataset* d, double* rowmajor_out) {
    return wrap([&] {
        require_handle(d, "dataset");
        require_handle(rowmajor_out, "out");
        const vicloud::Matrix var = vicloud::sandwich_variance(d->value);
        for (Eigen::Index i = 0; i < var.rows(); ++i)
            for (Eigen::Index j = 0; j < var.cols(); ++j)
                rowmajor_out[i * var.cols() + j] = var(i, j);
    });
}

vicl_status vicl_mr_wald(const vicl_dataset* d, int32_t j, double null_value,
                         double* mr_hat_out, double* sigma_hat_out, double* z_out,
                         double* p_out, char** json_out) {
    return wrap([&] {
        require_handle(d, "dataset");
        const vicloud::RelianceTest result =
            vicloud::mr_wald_statistic(d->value, j, null_value);
        if (mr_hat_out) *mr_hat_out = result.mr_hat;
        if (sigma_hat_out) *sigma_hat_out = result.sigma_hat;
        if (z_out) *z_out = result.z_stat;
        if (p_out) *p_out = result.p_value;
        if (json_out)
            *json_out = dup_string(vicloud::reliance_test_to_json(
                result, d->value.names[static_cast<std::size_t>(j)]));
    });
}

/* ----------------------------------------------------------------- misc */

vicl_status vicl_file_hash(const char* path, char** hex_out) {
    return wrap([&] {
        require_handle(path, "path");
        require_handle(hex_out, "out");
        *hex_out = dup_string(vicloud::file_hash_hex(path));
    });
}

uint64_t vicl_label_seed(const char* label, uint64_t master) {
    return vicloud::label_seed(label ? label : "", master);
}

}  // extern "C"
