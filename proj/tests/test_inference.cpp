#include <doctest.h>

#include <cmath>

#include "core/inference.hpp"
#include "core/dataset.hpp"
#include "core/rng.hpp"

using namespace vicloud;

namespace {

Dataset gaussian_null(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    return gen_gaussian(Matrix::Identity(p, p), Vector::Zero(p), n, seed);
}

}  // namespace

TEST_CASE("chi-square CDF reference points") {
    CHECK(chi_square_1_cdf(0.0) == 0.0);
    CHECK(chi_square_1_cdf(3.841458820694124) == doctest::Approx(0.95).epsilon(1e-6));
    CHECK(chi_square_1_cdf(6.634896601021215) == doctest::Approx(0.99).epsilon(1e-6));
}

TEST_CASE("empirical reliance function zeros") {
    const Dataset d = gaussian_null(50, 3, 11);
    CHECK(empirical_mr_quadratic(Vector::Zero(3), d, 0) == 0.0);

    Vector beta(3);
    beta << 0.0, 1.4, -2.2;  // beta_j = 0 kills every term for j = 0
    CHECK(empirical_mr_quadratic(beta, d, 0) == 0.0);
}

TEST_CASE("empirical reliance converges to the analytic population value") {
    Matrix corr = Matrix::Identity(2, 2);
    corr(0, 1) = corr(1, 0) = 0.2;
    Vector corr_xy(2);
    corr_xy << 0.4, 0.5;
    const Dataset d = gen_gaussian(corr, corr_xy, 100000, 77);
    Vector beta_star(2);
    beta_star << 0.3125, 0.4375;
    CHECK(std::abs(empirical_mr_quadratic(beta_star, d, 0) - 0.1953125) < 0.02);
}

TEST_CASE("property: analytic reliance gradient matches finite differences") {
    const Dataset d = gaussian_null(200, 3, 21);
    Rng rng(505);
    for (int point = 0; point < 20; ++point) {
        Vector beta(3);
        for (int i = 0; i < 3; ++i) beta[i] = rng.normal();
        for (Eigen::Index j = 0; j < 3; ++j) {
            const Vector gradient = empirical_mr_gradient(beta, d, j);
            const double h = 1e-6;
            for (Eigen::Index k = 0; k < 3; ++k) {
                Vector lo = beta, hi = beta;
                lo[k] -= h;
                hi[k] += h;
                const double numeric = (empirical_mr_quadratic(hi, d, j) -
                                        empirical_mr_quadratic(lo, d, j)) /
                                       (2.0 * h);
                const double scale = std::max(1.0, std::abs(gradient[k]));
                CHECK(std::abs(gradient[k] - numeric) / scale < 1e-6);
            }
        }
    }
}

TEST_CASE("sandwich variance: homoskedastic case collapses to sigma^2 Sxx^{-1}") {
    const Eigen::Index n = 10000;
    Rng rng(31);
    Dataset d;
    d.features.resize(n, 2);
    d.outcome.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.features(i, 0) = rng.normal();
        d.features(i, 1) = rng.normal();
        d.outcome[i] =
            0.5 * d.features(i, 0) - 0.3 * d.features(i, 1) + 0.5 * rng.normal();
    }
    d.names = {"x1", "x2"};

    const Matrix robust = sandwich_variance(d);
    const Matrix sxx = (d.features.transpose() * d.features) / static_cast<double>(n);
    const Matrix classical = 0.25 * sxx.inverse();
    CHECK(((robust - classical).cwiseAbs().maxCoeff() /
           classical.cwiseAbs().maxCoeff()) < 0.10);
}

TEST_CASE("sandwich variance: exact fit gives the zero matrix") {
    Dataset d = gaussian_null(100, 2, 41);
    Vector beta(2);
    beta << 1.5, -2.0;
    d.outcome = d.features * beta;  // residuals are identically zero
    CHECK(sandwich_variance(d).cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("sandwich variance: duplicated column is singular") {
    Dataset d = gaussian_null(100, 2, 51);
    d.features.col(1) = d.features.col(0);
    CHECK_THROWS_WITH_AS(sandwich_variance(d), doctest::Contains("singular"), Error);
}

TEST_CASE("wald statistic: self-test and degenerate guard") {
    Matrix corr = Matrix::Identity(2, 2);
    Vector corr_xy(2);
    corr_xy << 0.4, 0.5;
    const Dataset d = gen_gaussian(corr, corr_xy, 500, 61);

    const RelianceTest base = mr_wald_statistic(d, 0, 0.0);
    CHECK(base.z_stat >= 0.0);
    const RelianceTest self = mr_wald_statistic(d, 0, base.mr_hat);
    CHECK(self.z_stat == doctest::Approx(0.0));
    CHECK(self.p_value == doctest::Approx(1.0));
}

TEST_CASE("wald statistic scales linearly in n at fixed moments") {
    Matrix corr = Matrix::Identity(2, 2);
    Vector corr_xy(2);
    corr_xy << 0.3, 0.0;
    const Dataset d = gen_gaussian(corr, corr_xy, 400, 71);

    Dataset doubled;
    doubled.features.resize(d.n() * 2, d.p());
    doubled.outcome.resize(d.n() * 2);
    doubled.features << d.features, d.features;  // duplicate rows: same moments
    doubled.outcome << d.outcome, d.outcome;
    doubled.names = d.names;

    const RelianceTest once = mr_wald_statistic(d, 0, 0.0);
    const RelianceTest twice = mr_wald_statistic(doubled, 0, 0.0);
    CHECK(twice.mr_hat == doctest::Approx(once.mr_hat).epsilon(1e-9));
    CHECK(twice.z_stat == doctest::Approx(2.0 * once.z_stat).epsilon(1e-9));
}

TEST_CASE("null calibration and power of the reliance test") {
    // Null: outcome independent of all features.
    int rejections = 0;
    const int reps = 500;
    for (int rep = 0; rep < reps; ++rep) {
        const Dataset d = gaussian_null(300, 3, 10000 + static_cast<std::uint64_t>(rep));
        if (mr_wald_statistic(d, 0, 0.0).z_stat > 3.841458820694124) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(rate > 0.025);
    CHECK(rate < 0.085);

    // Strong signal: sigma_1Y = 0.5.
    Matrix corr = Matrix::Identity(3, 3);
    Vector corr_xy(3);
    corr_xy << 0.5, 0.0, 0.0;
    int detected = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const Dataset d =
            gen_gaussian(corr, corr_xy, 500, 90000 + static_cast<std::uint64_t>(rep));
        if (mr_wald_statistic(d, 0, 0.0).z_stat > 3.841458820694124) ++detected;
    }
    CHECK(detected >= 50);
}
