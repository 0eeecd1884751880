#include <doctest.h>

#include <cmath>
#include <limits>

#include "core/rng.hpp"
#include "core/vic.hpp"

using namespace vicloud;

namespace {

CovarianceStructure two_feature_cov(double rho12, double s1y = 0.4, double s2y = 0.5) {
    Matrix sxx = Matrix::Identity(2, 2);
    sxx(0, 1) = sxx(1, 0) = rho12;
    Vector sxy(2);
    sxy << s1y, s2y;
    return CovarianceStructure::create(sxx, sxy, 1.0, true);
}

CovarianceStructure random_cov(Rng& rng, Eigen::Index p) {
    Matrix a(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.normal();
    Matrix sxx = a * a.transpose() / static_cast<double>(p);
    sxx.diagonal().array() += 0.5;
    Vector sxy(p);
    for (Eigen::Index i = 0; i < p; ++i) sxy[i] = 0.3 * rng.normal();
    return CovarianceStructure::create(sxx, sxy, 2.0 + rng.uniform(), true);
}

/// Radius along the axis aligned with coordinate j; requires alignment.
double axis_radius(const Ellipsoid& ell, Eigen::Index j) {
    for (Eigen::Index k = 0; k < ell.dim(); ++k)
        if (std::abs(std::abs(ell.rotation(j, k)) - 1.0) < 1e-8) return ell.radii[k];
    FAIL("no axis aligned with coordinate");
    return 0.0;
}

}  // namespace

TEST_CASE("closed-form reliance ellipsoid for uncorrelated features") {
    const auto cov = two_feature_cov(0.0);
    const Ellipsoid ell = vic_center_radii_uncorrelated(cov, 0.0, 0.05);
    const double root = std::sqrt(0.05 * 0.59);
    CHECK(ell.center[0] == doctest::Approx(0.32).epsilon(1e-12));
    CHECK(ell.center[1] == doctest::Approx(0.50).epsilon(1e-12));
    CHECK(ell.radii[0] == doctest::Approx(2.0 * 0.4 * root).epsilon(1e-12));
    CHECK(ell.radii[1] == doctest::Approx(2.0 * 0.5 * root).epsilon(1e-12));
    CHECK(ell.radii[0] < ell.radii[1]);  // ordering follows the outcome correlations

    // The center shrinks as the penalty grows.
    double previous = std::numeric_limits<double>::infinity();
    for (const double c : {0.0, 0.5, 1.0, 2.0}) {
        const Ellipsoid with_penalty = vic_center_radii_uncorrelated(cov, c, 0.05);
        CHECK(with_penalty.center[0] < previous);
        previous = with_penalty.center[0];
    }
}

TEST_CASE("closed form rejects correlated or degenerate inputs") {
    CHECK_THROWS_WITH_AS(vic_center_radii_uncorrelated(two_feature_cov(0.2), 0.0, 0.05),
                         doctest::Contains("uncorrelated"), Error);
    CHECK_THROWS_WITH_AS(vic_center_radii_uncorrelated(two_feature_cov(0.0, 0.0, 0.5),
                                                       0.0, 0.05),
                         doctest::Contains("zero"), Error);
}

TEST_CASE("reliance-map Jacobian closed forms") {
    const auto cov = two_feature_cov(0.0);
    Vector anywhere(2);
    anywhere << -1.3, 2.7;
    const JacobianMR jac = jacobian_mr(anywhere, cov);
    CHECK(jac.matrix(0, 0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(jac.matrix(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(jac.matrix(0, 1) == 0.0);
    CHECK(jac.matrix(1, 0) == 0.0);

    const auto correlated = two_feature_cov(0.2);
    const Vector beta_star = best_ridge(correlated, 0.0);
    const JacobianMR at_best = jacobian_mr(beta_star, correlated);
    CHECK(at_best.matrix(0, 0) == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(at_best.matrix(0, 1) == doctest::Approx(-0.125).epsilon(1e-12));
    CHECK(at_best.matrix(1, 0) == doctest::Approx(-0.175).epsilon(1e-12));
    CHECK(at_best.matrix(1, 1) == doctest::Approx(0.875).epsilon(1e-12));
}

TEST_CASE("property: Jacobian matches central finite differences") {
    Rng rng(888);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.below(3));
        const auto cov = random_cov(rng, p);
        for (int point = 0; point < 20; ++point) {
            Vector beta(p);
            for (Eigen::Index i = 0; i < p; ++i) beta[i] = rng.normal();
            const JacobianMR jac = jacobian_mr(beta, cov);
            const double h = 1e-6;
            for (Eigen::Index k = 0; k < p; ++k) {
                Vector lo = beta, hi = beta;
                lo[k] -= h;
                hi[k] += h;
                const Vector column =
                    (mr_linear_vector(hi, cov) - mr_linear_vector(lo, cov)) / (2.0 * h);
                for (Eigen::Index j = 0; j < p; ++j) {
                    const double scale = std::max(1.0, std::abs(jac.matrix(j, k)));
                    CHECK(std::abs(jac.matrix(j, k) - column[j]) / scale < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("linearized inverse reliance map") {
    const auto cov = two_feature_cov(0.0);
    Vector beta_bar(2);
    beta_bar << 0.4, 0.5;
    const JacobianMR jac = jacobian_mr(beta_bar, cov);

    CHECK((mr_inverse_approx(jac.base_mr, jac) - beta_bar).cwiseAbs().maxCoeff() == 0.0);

    Vector target(2);
    target << 0.32, 0.50;
    const Vector recovered = mr_inverse_approx(target, jac);
    CHECK(recovered[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(recovered[1] == doctest::Approx(0.5).epsilon(1e-12));
    // Exact round trip when features are uncorrelated (the map is linear).
    CHECK((mr_linear_vector(recovered, cov) - target).cwiseAbs().maxCoeff() < 1e-12);

    const auto no_signal = CovarianceStructure::create(Matrix::Identity(2, 2),
                                                       Vector::Zero(2), 1.0, true);
    const JacobianMR singular = jacobian_mr(Vector::Zero(2), no_signal);
    CHECK_THROWS_WITH_AS(mr_inverse_approx(target, singular), doctest::Contains("singular"),
                         Error);
}

TEST_CASE("linearized reliance ellipsoid reduces to the closed form") {
    RidgeSpec spec{two_feature_cov(0.0), 0.0, 0.05};
    const Ellipsoid closed = vic_center_radii_uncorrelated(spec.cov, spec.c, spec.epsilon);
    const Ellipsoid approx = vic_ellipsoid_approx(spec);
    CHECK((approx.center - closed.center).cwiseAbs().maxCoeff() < 1e-10);
    for (Eigen::Index j = 0; j < 2; ++j)
        CHECK(axis_radius(approx, j) == doctest::Approx(closed.radii[j]).epsilon(1e-10));
}

namespace {

double boundary_gap(double rho, double epsilon) {
    RidgeSpec spec{two_feature_cov(rho), 0.0, epsilon};
    const VICCloud truth = vic_forward_map(spec, 2000, 0, 31);
    const Ellipsoid approx = vic_ellipsoid_approx(spec);
    double worst = 0.0;
    for (int k = 0; k < 256; ++k) {
        const double angle = 2.0 * 3.14159265358979323846 * k / 256.0;
        Vector u(2);
        u << std::cos(angle), std::sin(angle);
        const Vector q = approx.map_from_unit(u);
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& pt : truth.points)
            nearest = std::min(nearest, (pt.mr - q).norm());
        worst = std::max(worst, nearest);
    }
    return worst;
}

}  // namespace

TEST_CASE("approximation tightens as the set shrinks and loosens with correlation") {
    const double gap_05 = boundary_gap(0.2, 0.05);
    const double gap_02 = boundary_gap(0.2, 0.02);
    const double gap_01 = boundary_gap(0.2, 0.01);
    CHECK(gap_02 < gap_05);
    CHECK(gap_01 < gap_02);

    CHECK(boundary_gap(0.5, 0.05) > gap_05);
}

TEST_CASE("quadratic-term bound: closed forms and brute-force soundness") {
    const auto uncorrelated = two_feature_cov(0.0);
    Vector box(2);
    box << 0.1, 0.1;
    CHECK(approx_error_bound(0, box, uncorrelated) == 0.0);
    CHECK(approx_error_bound(1, box, uncorrelated) == 0.0);

    const auto correlated = two_feature_cov(0.2);
    CHECK(approx_error_bound(0, box, correlated) == doctest::Approx(0.004).epsilon(1e-12));

    Rng rng(606);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.below(3));
        const auto cov = random_cov(rng, p);
        Vector radii(p);
        for (Eigen::Index i = 0; i < p; ++i) radii[i] = 0.05 + 0.3 * rng.uniform();
        for (Eigen::Index j = 0; j < p; ++j) {
            const double bound = approx_error_bound(j, radii, cov);
            double worst = 0.0;
            for (int draw = 0; draw < 10000; ++draw) {
                Vector t(p);
                for (Eigen::Index i = 0; i < p; ++i)
                    t[i] = radii[i] * (2.0 * rng.uniform() - 1.0);
                double quad = 0.0;
                for (Eigen::Index i = 0; i < p; ++i)
                    if (i != j) quad += cov.sigma_xx(i, j) * t[i] * (t[i] + t[j]);
                worst = std::max(worst, std::abs(quad));
            }
            CHECK(worst <= bound);
        }
    }
}

TEST_CASE("property: exact first-order identity with the explicit remainder") {
    Rng rng(515);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.below(3));
        const auto cov = random_cov(rng, p);
        Vector beta_bar(p);
        for (Eigen::Index i = 0; i < p; ++i) beta_bar[i] = rng.normal();
        const JacobianMR jac = jacobian_mr(beta_bar, cov);
        for (int point = 0; point < 100; ++point) {
            Vector beta(p);
            for (Eigen::Index i = 0; i < p; ++i) beta[i] = rng.normal();
            const Vector t = beta - beta_bar;
            const Vector lhs = mr_linear_vector(beta, cov) - jac.base_mr;
            const Vector linear = jac.matrix * t;
            for (Eigen::Index j = 0; j < p; ++j)
                CHECK(lhs[j] - linear[j] ==
                      doctest::Approx(taylor_remainder(j, t, cov)).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward-mapped boundary hits the closed-form ellipse") {
    RidgeSpec spec{two_feature_cov(0.0), 0.0, 0.05};
    const VICCloud cloud = vic_forward_map(spec, 500, 100, 19);
    const Ellipsoid closed = vic_center_radii_uncorrelated(spec.cov, spec.c, spec.epsilon);
    const double threshold = (1.0 + spec.epsilon) * min_ridge_loss(spec.cov, spec.c);

    for (int k = 0; k < 500; ++k) {
        const auto& pt = cloud.points[static_cast<std::size_t>(k)];
        const double ellipse = ((pt.mr - closed.center).array() / closed.radii.array())
                                   .matrix()
                                   .squaredNorm();
        CHECK(std::abs(ellipse - 1.0) < 1e-8);
        CHECK(pt.loss == doctest::Approx(threshold).epsilon(1e-9));
    }
    for (std::size_t k = 500; k < cloud.points.size(); ++k)
        CHECK(cloud.points[k].loss <= threshold * (1.0 + 1e-9));
}

TEST_CASE("outcome rescaling multiplies every reliance value by t^2, exactly") {
    RidgeSpec spec{two_feature_cov(0.2), 0.0, 0.05};
    const VICCloud base = vic_forward_map(spec, 300, 100, 23);

    CovarianceStructure scaled = spec.cov;  // Y -> 2Y
    scaled.sigma_xy *= 2.0;
    scaled.sigma_yy *= 4.0;
    const VICCloud rescaled = vic_forward_map({scaled, 0.0, 0.05}, 300, 100, 23);

    REQUIRE(base.size() == rescaled.size());
    for (Eigen::Index i = 0; i < base.size(); ++i) {
        const auto& a = base.points[static_cast<std::size_t>(i)];
        const auto& b = rescaled.points[static_cast<std::size_t>(i)];
        CHECK((b.mr - 4.0 * a.mr).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("feature rescaling leaves every reliance value unchanged") {
    RidgeSpec spec{two_feature_cov(0.2), 0.0, 0.05};
    const VICCloud base = vic_forward_map(spec, 300, 100, 29);

    Matrix scale = Matrix::Identity(2, 2);
    scale(0, 0) = 3.0;  // X1 -> 3 X1
    CovarianceStructure scaled = CovarianceStructure::create(
        scale * spec.cov.sigma_xx * scale, scale * spec.cov.sigma_xy, spec.cov.sigma_yy,
        true);
    const VICCloud rescaled = vic_forward_map({scaled, 0.0, 0.05}, 300, 100, 29);

    REQUIRE(base.size() == rescaled.size());
    for (Eigen::Index i = 0; i < base.size(); ++i) {
        const auto& a = base.points[static_cast<std::size_t>(i)];
        const auto& b = rescaled.points[static_cast<std::size_t>(i)];
        CHECK((b.mr - a.mr).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("membership diagnostic inverts the reliance map near the center") {
    RidgeSpec spec{two_feature_cov(0.2), 0.0, 0.05};
    const Vector beta_star = best_ridge(spec.cov, spec.c);
    const Vector target = mr_linear_vector(beta_star, spec.cov);
    const MembershipDiagnostic diag = vic_membership_diagnostic(target, spec);
    CHECK(diag.converged);
    CHECK(diag.contained);
    CHECK((diag.beta - beta_star).cwiseAbs().maxCoeff() < 1e-8);
}
