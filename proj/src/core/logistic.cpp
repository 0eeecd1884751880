#include "core/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"

namespace vicloud {

namespace {

double softplus(double z) {
    // log(1 + exp(z))
    if (z > 30.0) return z;
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Matrix augmented(const Dataset& d) {
    Matrix x(d.n(), d.p() + 1);
    x.col(0).setOnes();
    x.rightCols(d.p()) = d.features;
    return x;
}

void check_outcomes(const Dataset& d) {
    for (Eigen::Index i = 0; i < d.n(); ++i)
        require(d.outcome[i] == 1.0 || d.outcome[i] == -1.0, ErrorKind::data,
                "logistic: outcomes must be -1 or +1 (row " + std::to_string(i + 1) + ")");
}

}  // namespace

double logistic_loss(const Vector& beta, const Dataset& d) {
    require(beta.size() == d.p() + 1, ErrorKind::config,
            "logistic: beta must have length p + 1 (intercept first)");
    check_outcomes(d);
    double total = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        const double margin =
            d.outcome[i] * (beta[0] + beta.tail(d.p()).dot(d.features.row(i)));
        total += softplus(-margin);
    }
    return total;
}

LogisticFit fit_logistic(const Dataset& d, double tol, int max_iter) {
    d.validate();
    check_outcomes(d);
    require(tol > 0.0, ErrorKind::config, "logistic: tol must be > 0");
    require(max_iter >= 1, ErrorKind::config, "logistic: max_iter must be >= 1");

    const Matrix x = augmented(d);
    const Eigen::Index q = x.cols();
    Vector beta = Vector::Zero(q);
    double loss = static_cast<double>(d.n()) * std::log(2.0);

    LogisticFit fit;
    for (int iter = 1; iter <= max_iter; ++iter) {
        fit.iterations = iter;
        Vector gradient = Vector::Zero(q);
        Matrix hessian = Matrix::Zero(q, q);
        for (Eigen::Index i = 0; i < d.n(); ++i) {
            const double margin = d.outcome[i] * x.row(i).dot(beta);
            const double s = sigmoid(-margin);  // d loss / d margin, negated
            gradient.noalias() -= d.outcome[i] * s * x.row(i).transpose();
            const double w = s * (1.0 - s);
            hessian.noalias() += w * x.row(i).transpose() * x.row(i);
        }
        if (gradient.norm() < tol) {
            // A vanishing gradient at (numerically) zero loss means every row
            // is classified with near-certainty: the classes are separated and
            // the true optimum is at infinity.
            if (loss < 1e-8)
                throw_data(
                    "logistic: zero loss at convergence; the classes appear perfectly "
                    "separated");
            fit.beta = beta;
            fit.loss = loss;
            Eigen::LDLT<Matrix> ldlt(hessian);
            require(ldlt.info() == Eigen::Success && ldlt.isPositive(), ErrorKind::numeric,
                    "logistic: Hessian is singular at the optimum");
            const Matrix hessian_inverse = ldlt.solve(Matrix::Identity(q, q));
            fit.standard_errors = hessian_inverse.diagonal().cwiseSqrt();
            return fit;
        }

        // Damped Newton step: fall back towards gradient descent if the
        // Hessian is near-singular (saturated rows).
        Eigen::LDLT<Matrix> ldlt(hessian);
        Vector step;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
            ldlt.vectorD().minCoeff() > 1e-12 * hessian.trace())
            step = ldlt.solve(gradient);
        else {
            Matrix damped = hessian;
            damped.diagonal().array() += 1e-6 * std::max(1.0, hessian.trace());
            step = Eigen::LDLT<Matrix>(damped).solve(gradient);
        }

        double step_size = 1.0;
        Vector candidate;
        double candidate_loss = 0.0;
        for (int halving = 0; halving < 40; ++halving) {
            candidate = beta - step_size * step;
            candidate_loss = logistic_loss(candidate, d);
            if (candidate_loss <= loss) break;
            step_size *= 0.5;
        }
        if (candidate_loss > loss)
            throw_numeric("logistic: line search failed to reduce the loss");
        beta = candidate;
        loss = candidate_loss;

        if (beta.norm() > 1e4)
            throw_data(
                "logistic: coefficients diverge; the classes appear perfectly separated");
    }
    throw_numeric("logistic: max_iter reached before meeting the gradient tolerance");
}

Ellipsoid fit_pca_ellipsoid(const std::vector<Vector>& points) {
    require(!points.empty(), ErrorKind::config, "pca: empty point set");
    const Eigen::Index q = points.front().size();
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    require(n >= q + 1, ErrorKind::numeric,
            "pca: need at least dim + 1 points, got " + std::to_string(n));

    Vector center = Vector::Zero(q);
    for (const auto& pt : points) center += pt;
    center /= static_cast<double>(n);

    Matrix scatter = Matrix::Zero(q, q);
    for (const auto& pt : points) {
        const Vector centered = pt - center;
        scatter.noalias() += centered * centered.transpose();
    }
    scatter /= static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
    require(eig.info() == Eigen::Success, ErrorKind::numeric, "pca: eigensolver failed");
    const Vector lambda = eig.eigenvalues();
    require(lambda.minCoeff() > 1e-12 * std::max(lambda.maxCoeff(), 1e-300),
            ErrorKind::numeric, "pca: point set is rank-deficient");

    Ellipsoid ell;
    ell.center = center;
    ell.rotation.resize(q, q);
    for (Eigen::Index k = 0; k < q; ++k)  // descending eigenvalue order
        ell.rotation.col(k) = eig.eigenvectors().col(q - 1 - k);
    fix_eigenvector_signs(ell.rotation);

    ell.radii.resize(q);
    for (Eigen::Index k = 0; k < q; ++k) {
        double extent = 0.0;
        for (const auto& pt : points)
            extent = std::max(extent, std::abs(ell.rotation.col(k).dot(pt - center)));
        ell.radii[k] = extent;
    }
    require((ell.radii.array() > 0.0).all(), ErrorKind::numeric,
            "pca: zero extent along an axis");
    ell.validate();
    return ell;
}

namespace {

struct Survivors {
    std::vector<Vector> betas;
    std::vector<double> losses;
};

/// One elimination pass: keep draws with loss <= threshold.
Survivors eliminate(const Dataset& d, const std::vector<Vector>& draws, double threshold) {
    Survivors out;
    for (const auto& beta : draws) {
        const double loss = logistic_loss(beta, d);
        if (loss <= threshold) {
            out.betas.push_back(beta);
            out.losses.push_back(loss);
        }
    }
    return out;
}

std::vector<Vector> draw_box(const Vector& center, const Vector& half_widths, int count,
                             std::uint64_t seed) {
    std::vector<Vector> draws;
    draws.reserve(static_cast<std::size_t>(count));
    const Eigen::Index q = center.size();
    for (int k = 0; k < count; ++k) {
        Rng rng(derive_seed(seed, 1, static_cast<std::uint64_t>(k)));
        Vector pt(q);
        for (Eigen::Index i = 0; i < q; ++i)
            pt[i] = center[i] + (2.0 * rng.uniform() - 1.0) * half_widths[i];
        draws.push_back(std::move(pt));
    }
    return draws;
}

std::vector<Vector> draw_ellipsoid(const Ellipsoid& ell, double inflate, int count,
                                   std::uint64_t seed, std::uint64_t round,
                                   double radial_exponent) {
    std::vector<Vector> draws;
    draws.reserve(static_cast<std::size_t>(count));
    const Eigen::Index q = ell.dim();
    for (int k = 0; k < count; ++k) {
        Rng rng(derive_seed(seed, round, static_cast<std::uint64_t>(k)));
        Vector u(q);
        for (Eigen::Index i = 0; i < q; ++i) u[i] = rng.normal();
        const double norm = u.norm();
        if (norm == 0.0) {
            u.setZero();
        } else {
            const double radial = std::pow(rng.uniform(), radial_exponent);
            u *= radial / norm;
        }
        draws.push_back(ell.map_from_unit(inflate * u));
    }
    return draws;
}

}  // namespace

std::pair<VICCloud, SamplerReport> sample_rashomon_logistic(const Dataset& d,
                                                            double epsilon,
                                                            const SamplerConfig& cfg) {
    cfg.validate();
    require(epsilon >= 0.0, ErrorKind::config, "sampler: epsilon must be >= 0");

    const LogisticFit fit = fit_logistic(d);
    const double threshold = (1.0 + epsilon) * fit.loss;

    SamplerReport report;
    report.l_star = fit.loss;
    report.beta_hat = fit.beta;
    report.box_scale_used =
        cfg.box_scale > 0.0 ? cfg.box_scale : tune_box_scale(d, epsilon, cfg);

    // Round 1: uniform draws in the box beta_hat +- box_scale * se.
    const Vector half_widths = report.box_scale_used * fit.standard_errors;
    std::vector<Vector> draws = draw_box(fit.beta, half_widths, cfg.n_per_round, cfg.seed);
    Survivors survivors = eliminate(d, draws, threshold);
    require(!survivors.betas.empty(), ErrorKind::numeric,
            "sampler: all points eliminated in round 1 (box too large or epsilon too small)");
    report.rounds.push_back({static_cast<int>(survivors.betas.size()),
                             fit_pca_ellipsoid(survivors.betas)});

    // Rounds 2..M+1: refit, inflate by r, redraw, eliminate.
    for (int round = 0; round < cfg.m_rounds; ++round) {
        const Ellipsoid& current = report.rounds.back().ellipsoid;
        draws = draw_ellipsoid(current, cfg.r, cfg.n_per_round, cfg.seed,
                               static_cast<std::uint64_t>(round + 2), cfg.radial_exponent);
        survivors = eliminate(d, draws, threshold);
        require(!survivors.betas.empty(), ErrorKind::numeric,
                "sampler: all points eliminated in round " + std::to_string(round + 2) +
                    " (r too large or epsilon too small)");
        report.rounds.push_back({static_cast<int>(survivors.betas.size()),
                                 fit_pca_ellipsoid(survivors.betas)});
    }
    report.final_ellipsoid = report.rounds.back().ellipsoid;

    // Diagnostic survival rate from the final ellipsoid scaled by r_bar. The
    // draw stream is labeled independently of (r, M) so that tuning tables
    // compare candidates with common random numbers.
    const std::vector<Vector> diagnostic =
        draw_ellipsoid(report.final_ellipsoid, cfg.r_bar, cfg.n_per_round, cfg.seed,
                       0xD1A6u, cfg.radial_exponent);
    report.survival_rate =
        static_cast<double>(eliminate(d, diagnostic, threshold).betas.size()) /
        static_cast<double>(cfg.n_per_round);

    // Reliance vectors (ratio variant) for the final survivors.
    VICCloud cloud;
    cloud.model_class = "logistic";
    cloud.variant = MRVariant::ratio;
    cloud.epsilon = epsilon;
    cloud.c = 0.0;
    cloud.seed = cfg.seed;
    cloud.sampler_settings =
        "{\"n_per_round\":" + std::to_string(cfg.n_per_round) +
        ",\"box_scale\":" + std::to_string(report.box_scale_used) +
        ",\"r\":" + std::to_string(cfg.r) + ",\"m_rounds\":" + std::to_string(cfg.m_rounds) +
        ",\"r_bar\":" + std::to_string(cfg.r_bar) +
        ",\"mr_shuffles\":" + std::to_string(cfg.mr_shuffles) + "}";
    cloud.feature_names = d.names;
    cloud.points.reserve(survivors.betas.size());
    for (std::size_t i = 0; i < survivors.betas.size(); ++i) {
        ReliancePoint pt;
        pt.beta = survivors.betas[i];
        pt.loss = survivors.losses[i];
        const LogisticPredictor model(pt.beta);
        pt.mr.resize(d.p());
        for (Eigen::Index j = 0; j < d.p(); ++j)
            pt.mr[j] = mr_empirical_permute(
                model, d, j, cfg.mr_shuffles,
                derive_seed(cfg.seed, 0xA11CE, static_cast<std::uint64_t>(j)),
                MRVariant::ratio);
        cloud.points.push_back(std::move(pt));
    }
    return {std::move(cloud), std::move(report)};
}

double tune_box_scale(const Dataset& d, double epsilon, const SamplerConfig& cfg,
                      double target, double slack) {
    const LogisticFit fit = fit_logistic(d);
    const double threshold = (1.0 + epsilon) * fit.loss;
    require(epsilon > 0.0, ErrorKind::config, "sampler: box tuning needs epsilon > 0");

    auto survival = [&](double scale) {
        const std::vector<Vector> draws =
            draw_box(fit.beta, (scale * fit.standard_errors).eval(), cfg.n_per_round,
                     cfg.seed);
        return static_cast<double>(eliminate(d, draws, threshold).betas.size()) /
               static_cast<double>(cfg.n_per_round);
    };

    // Survival is ~1 for tiny boxes and decreasing; bracket then bisect.
    double lo = 1e-3, hi = 1.0;
    while (survival(hi) > target && hi < 1e6) hi *= 2.0;
    require(hi < 1e6, ErrorKind::numeric, "sampler: box tuning failed to bracket the target");
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double rate = survival(mid);
        if (std::abs(rate - target) <= slack) return mid;
        if (rate > target)
            lo = mid;
        else
            hi = mid;
    }
    throw_numeric("sampler: box tuning did not converge; widen the slack");
}

TuneResult tune_sampler(const Dataset& d, double epsilon,
                        const std::vector<double>& r_candidates,
                        const std::vector<int>& m_candidates, double r_bar,
                        const SamplerConfig& base_cfg, double stability_threshold) {
    require(!r_candidates.empty() && !m_candidates.empty(), ErrorKind::config,
            "tune: candidate lists must be non-empty");
    require(std::is_sorted(r_candidates.begin(), r_candidates.end()) &&
                std::is_sorted(m_candidates.begin(), m_candidates.end()),
            ErrorKind::config, "tune: candidates must be sorted ascending");
    require(r_bar >= r_candidates.back(), ErrorKind::config,
            "tune: r_bar must be >= max(r_candidates)");

    TuneResult result;
    auto run = [&](double r, int m) {
        SamplerConfig cfg = base_cfg;
        cfg.r = r;
        cfg.m_rounds = m;
        cfg.r_bar = r_bar;
        return sample_rashomon_logistic(d, epsilon, cfg).second.survival_rate;
    };
    for (const double r : r_candidates)
        for (const int m : m_candidates) result.table.push_back({r, m, run(r, m)});

    auto rate_at = [&](double r, int m) {
        for (const auto& row : result.table)
            if (row.r == r && row.m == m) return row.survival_rate;
        throw_numeric("tune: missing table row");
    };

    // Plateau in r at the deepest M, then plateau in M at the chosen r.
    const int m_probe = m_candidates.back();
    int chosen_r_index = -1;
    for (std::size_t i = 0; i + 1 < r_candidates.size(); ++i) {
        bool stable = true;
        for (std::size_t k = i; k + 1 < r_candidates.size(); ++k)
            if (std::abs(rate_at(r_candidates[k + 1], m_probe) -
                         rate_at(r_candidates[k], m_probe)) > stability_threshold)
                stable = false;
        if (stable) {
            chosen_r_index = static_cast<int>(i);
            break;
        }
    }
    require(chosen_r_index >= 0, ErrorKind::numeric,
            "tune: no stable plateau in r; widen the candidate list");
    result.chosen_r = r_candidates[static_cast<std::size_t>(chosen_r_index)];

    int chosen_m = m_candidates.back();
    for (std::size_t i = 0; i + 1 < m_candidates.size(); ++i) {
        bool stable = true;
        for (std::size_t k = i; k + 1 < m_candidates.size(); ++k)
            if (std::abs(rate_at(result.chosen_r, m_candidates[k + 1]) -
                         rate_at(result.chosen_r, m_candidates[k])) > stability_threshold)
                stable = false;
        if (stable) {
            chosen_m = m_candidates[i];
            break;
        }
    }
    result.chosen_m = chosen_m;
    return result;
}

}  // namespace vicloud
