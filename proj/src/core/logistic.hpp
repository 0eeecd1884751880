#pragma once

#include <cstdint>
#include <vector>

#include "core/linear.hpp"
#include "core/vic.hpp"

namespace vicloud {

/// Sum over rows of log(1 + exp(-y_i * (b0 + x_i . b))), overflow-safe.
/// `beta` has length p + 1 with the intercept first; outcomes must be +-1.
double logistic_loss(const Vector& beta, const Dataset& d);

struct LogisticFit {
    Vector beta;  // p + 1, intercept first
    double loss = 0.0;
    int iterations = 0;
    Vector standard_errors;  // from the inverse Hessian at the optimum
};

/// Newton iteration with step halving. Fails on perfect separation (norm of
/// the iterate diverges while the gradient cannot reach the tolerance) and on
/// hitting max_iter.
LogisticFit fit_logistic(const Dataset& d, double tol = 1e-8, int max_iter = 100);

/// Knobs for the iterative sample / eliminate / refit loop.
struct SamplerConfig {
    int n_per_round = 500;        // N
    double box_scale = 0.0;       // multiplier on standard errors; <= 0 -> auto-tune
    double r = 1.2;               // ellipsoid inflation factor, > 1
    int m_rounds = 3;             // M
    double r_bar = 2.0;           // diagnostic inflation upper bound, >= r
    std::uint64_t seed = 0;
    int mr_shuffles = 20;         // permutations per feature for reliance
    double radial_exponent = 1.0; // radial draw is uniform^exponent; 1 = uniform

    void validate() const {
        require(n_per_round >= 10, ErrorKind::config, "sampler: N must be >= 10");
        require(r > 1.0, ErrorKind::config, "sampler: r must be > 1");
        require(r <= r_bar, ErrorKind::config, "sampler: r must be <= r_bar");
        require(m_rounds >= 1, ErrorKind::config, "sampler: M must be >= 1");
        require(mr_shuffles >= 1, ErrorKind::config, "sampler: mr_shuffles must be >= 1");
        require(radial_exponent > 0.0, ErrorKind::config,
                "sampler: radial exponent must be > 0");
    }
};

struct SamplerRound {
    int retained_count = 0;
    Ellipsoid ellipsoid;  // fitted to this round's survivors
};

struct SamplerReport {
    std::vector<SamplerRound> rounds;  // initial box round first, then M refits
    double survival_rate = 0.0;        // diagnostic draw from final ellipsoid * r_bar
    Ellipsoid final_ellipsoid;
    double box_scale_used = 0.0;
    double l_star = 0.0;
    Vector beta_hat;
};

/// Smallest enclosing description of a point set: center = mean, axes =
/// eigenvectors of the sample covariance (descending eigenvalue), radius per
/// axis = largest |projection| of any point.
Ellipsoid fit_pca_ellipsoid(const std::vector<Vector>& points);

/// Draws coefficients around the fitted optimum, keeps those with loss within
/// (1 + epsilon) of the minimum, alternates refitting an ellipsoid to the
/// survivors with resampling from it inflated by r. Returns the final
/// survivors with ratio-variant reliance vectors.
std::pair<VICCloud, SamplerReport> sample_rashomon_logistic(const Dataset& d,
                                                            double epsilon,
                                                            const SamplerConfig& cfg);

/// Bisection on box_scale until the initial-round survival rate lands in
/// [target - slack, target + slack].
double tune_box_scale(const Dataset& d, double epsilon, const SamplerConfig& cfg,
                      double target = 0.75, double slack = 0.10);

struct TuneRow {
    double r = 0.0;
    int m = 0;
    double survival_rate = 0.0;
};

struct TuneResult {
    double chosen_r = 0.0;
    int chosen_m = 0;
    std::vector<TuneRow> table;
};

/// Runs the sampler for every (r, M) candidate pair, measures the survival
/// rate of a diagnostic draw from the final ellipsoid scaled by r_bar, and
/// picks the smallest r (then smallest M) after which consecutive survival
/// rates move by less than `stability_threshold`.
TuneResult tune_sampler(const Dataset& d, double epsilon,
                        const std::vector<double>& r_candidates,
                        const std::vector<int>& m_candidates, double r_bar,
                        const SamplerConfig& base_cfg,
                        double stability_threshold = 0.02);

}  // namespace vicloud
