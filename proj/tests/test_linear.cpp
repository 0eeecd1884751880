#include <doctest.h>

#include <cmath>

#include "core/linear.hpp"
#include "core/rng.hpp"

using namespace vicloud;

namespace {

CovarianceStructure two_feature_cov(double rho12, double rho1y = 0.4, double rho2y = 0.5) {
    Matrix sxx = Matrix::Identity(2, 2);
    sxx(0, 1) = sxx(1, 0) = rho12;
    Vector sxy(2);
    sxy << rho1y, rho2y;
    return CovarianceStructure::create(sxx, sxy, 1.0, true);
}

}  // namespace

TEST_CASE("ridge_loss closed forms") {
    const auto cov = two_feature_cov(0.0);
    RidgeSpec spec{cov, 0.0, 0.05};

    CHECK(ridge_loss(Vector::Zero(2), spec) == doctest::Approx(1.0));  // sigma_yy

    Vector beta(2);
    beta << 0.4, 0.5;
    CHECK(ridge_loss(beta, spec) == doctest::Approx(0.59).epsilon(1e-12));

    const auto correlated = two_feature_cov(0.2);
    const Vector beta_star = best_ridge(correlated, 0.0);
    CHECK(ridge_loss(beta_star, correlated, 0.0) == doctest::Approx(0.65625).epsilon(1e-12));
}

TEST_CASE("best_ridge solves the expected systems") {
    const Vector diag_solution = best_ridge(two_feature_cov(0.0), 0.0);
    CHECK(diag_solution[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(diag_solution[1] == doctest::Approx(0.5).epsilon(1e-12));

    const Vector correlated_solution = best_ridge(two_feature_cov(0.2), 0.0);
    CHECK(correlated_solution[0] == doctest::Approx(0.3125).epsilon(1e-12));
    CHECK(correlated_solution[1] == doctest::Approx(0.4375).epsilon(1e-12));

    // No signal: the minimizer is the zero vector.
    Matrix sxx = Matrix::Identity(2, 2);
    const auto no_signal = CovarianceStructure::create(sxx, Vector::Zero(2), 1.0, true);
    CHECK(best_ridge(no_signal, 0.3).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    // Rank-deficient features with c = 0.
    Matrix singular(2, 2);
    singular << 1.0, 1.0, 1.0, 1.0;
    Vector sxy(2);
    sxy << 0.1, 0.1;
    const auto degenerate = CovarianceStructure::create(singular, sxy, 1.0, true);
    CHECK_THROWS_WITH_AS(best_ridge(degenerate, 0.0), doctest::Contains("singular"), Error);
}

TEST_CASE("gradient vanishes at the minimizer") {
    const auto cov = two_feature_cov(0.2);
    const Vector beta_star = best_ridge(cov, 0.1);
    Matrix system = cov.sigma_xx;
    system.diagonal().array() += 0.1;
    const Vector gradient = 2.0 * (system * beta_star - cov.sigma_xy);
    CHECK(gradient.norm() < 1e-8 * cov.sigma_xy.norm());
}

TEST_CASE("rashomon ellipsoid: uncorrelated case is a circle of known radius") {
    RidgeSpec spec{two_feature_cov(0.0), 0.0, 0.05};
    const Ellipsoid ell = rashomon_ellipsoid_linear(spec);
    const double radius = std::sqrt(0.05 * 0.59);
    CHECK(ell.center[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(ell.center[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ell.radii[0] == doctest::Approx(radius).epsilon(1e-12));
    CHECK(ell.radii[1] == doctest::Approx(radius).epsilon(1e-12));

    // Doubling epsilon scales every radius by sqrt(2).
    RidgeSpec doubled = spec;
    doubled.epsilon = 0.10;
    const Ellipsoid bigger = rashomon_ellipsoid_linear(doubled);
    CHECK(bigger.radii[0] == doctest::Approx(radius * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(bigger.radii[1] == doctest::Approx(radius * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("rashomon ellipsoid: correlated axes are the diagonal directions") {
    RidgeSpec spec{two_feature_cov(0.2), 0.0, 0.05};
    const Ellipsoid ell = rashomon_ellipsoid_linear(spec);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    // Ascending eigenvalues of [[1,.2],[.2,1]]: 0.8 -> (1,-1)/sqrt2, 1.2 -> (1,1)/sqrt2.
    CHECK(ell.rotation(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(ell.rotation(1, 0) == doctest::Approx(-inv_sqrt2).epsilon(1e-12));
    CHECK(ell.rotation(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(ell.rotation(1, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
    CHECK(ell.radii[0] > ell.radii[1]);  // descending radii
}

TEST_CASE("degenerate slack is an error") {
    // Perfect fit: sigma_yy = sigma_xy^T beta*, so L* = 0.
    Matrix sxx = Matrix::Identity(1, 1);
    Vector sxy(1);
    sxy << 1.0;
    const auto cov = CovarianceStructure::create(sxx, sxy, 1.0, true);
    RidgeSpec spec{cov, 0.0, 0.05};
    CHECK_THROWS_WITH_AS(rashomon_ellipsoid_linear(spec), doctest::Contains("degenerate"),
                         Error);
}

TEST_CASE("contains_linear agrees with the loss threshold and the ellipsoid") {
    RidgeSpec spec{two_feature_cov(0.0), 0.0, 0.05};
    const Vector beta_star = best_ridge(spec.cov, spec.c);
    CHECK(contains_linear(beta_star, spec));

    const double radius = std::sqrt(0.05 * 0.59);
    Vector boundary(2);
    boundary << 0.4 + radius, 0.5;
    CHECK(contains_linear(boundary, spec));

    Vector outside(2);
    outside << 0.6, 0.5;
    CHECK_FALSE(contains_linear(outside, spec));
}

TEST_CASE("property: minimizer optimality under unit-scaled perturbations") {
    const auto cov = two_feature_cov(0.2);
    RidgeSpec spec{cov, 0.05, 1.0};
    const Vector beta_star = best_ridge(cov, spec.c);
    const double loss_star = ridge_loss(beta_star, spec);
    Rng rng(2024);
    for (int k = 0; k < 100; ++k) {
        Vector delta(2);
        delta << rng.normal(), rng.normal();
        delta *= 1e-3 / delta.norm();
        CHECK(ridge_loss(beta_star + delta, spec) > loss_star);
    }
}

TEST_CASE("property: membership by loss and by ellipsoid geometry coincide") {
    for (const double rho : {0.0, 0.2, 0.5}) {
        RidgeSpec spec{two_feature_cov(rho), 0.0, 0.05};
        const Ellipsoid ell = rashomon_ellipsoid_linear(spec);
        const double threshold = (1.0 + spec.epsilon) * min_ridge_loss(spec.cov, spec.c);
        Rng rng(55);
        int checked = 0;
        for (int k = 0; k < 1000; ++k) {
            Vector beta(2);
            beta << 0.4 + 0.6 * (rng.uniform() - 0.5), 0.5 + 0.6 * (rng.uniform() - 0.5);
            const double loss = ridge_loss(beta, spec);
            if (std::abs(loss - threshold) < 1e-9) continue;  // skip the boundary band
            ++checked;
            CHECK(contains_linear(beta, spec) == ell.contains(beta));
        }
        CHECK(checked > 900);
    }
}

TEST_CASE("property: ellipsoid surface points sit on the iso-loss shell") {
    RidgeSpec spec{two_feature_cov(0.2), 0.0, 0.05};
    const Ellipsoid ell = rashomon_ellipsoid_linear(spec);
    const double target = (1.0 + spec.epsilon) * min_ridge_loss(spec.cov, spec.c);
    Rng rng(77);
    for (int k = 0; k < 500; ++k) {
        Vector u(2);
        u << rng.normal(), rng.normal();
        u /= u.norm();
        const Vector beta = ell.map_from_unit(u);
        CHECK(ridge_loss(beta, spec) == doctest::Approx(target).epsilon(1e-9));
    }
}
