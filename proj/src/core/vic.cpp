#include "core/vic.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace vicloud {

Matrix VICCloud::mr_matrix() const {
    Matrix out(size(), mr_dim());
    for (Eigen::Index i = 0; i < size(); ++i)
        out.row(i) = points[static_cast<std::size_t>(i)].mr.transpose();
    return out;
}

Ellipsoid vic_center_radii_uncorrelated(const CovarianceStructure& cov, double c,
                                        double epsilon) {
    require(epsilon > 0.0, ErrorKind::config, "vic: epsilon must be > 0");
    const Eigen::Index p = cov.p();
    const double diag_scale = std::max(1.0, cov.sigma_xx.diagonal().cwiseAbs().maxCoeff());

    double worst = 0.0;
    Eigen::Index worst_i = 0, worst_j = 0;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            if (std::abs(cov.sigma_xx(i, j)) > worst) {
                worst = std::abs(cov.sigma_xx(i, j));
                worst_i = i;
                worst_j = j;
            }
    require(worst <= 1e-10 * diag_scale, ErrorKind::numeric,
            "vic: closed form needs uncorrelated features; sigma_xx(" +
                std::to_string(worst_i + 1) + "," + std::to_string(worst_j + 1) + ") = " +
                std::to_string(worst));

    const double l_star = min_ridge_loss(cov, c);
    const double budget = epsilon * l_star;
    require(budget > 0.0, ErrorKind::numeric,
            "vic: epsilon * L* is zero (perfect fit); the set is degenerate");

    Ellipsoid ell;
    ell.center.resize(p);
    ell.radii.resize(p);
    ell.rotation = Matrix::Identity(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double var_c = cov.sigma_xx(j, j) + c;
        require(var_c > 0.0, ErrorKind::numeric, "vic: zero-variance feature " +
                                                     std::to_string(j + 1));
        const double s = cov.sigma_xy[j];
        require(s != 0.0, ErrorKind::numeric,
                "vic: sigma_xy is zero for feature " + std::to_string(j + 1) +
                    "; the reliance ellipsoid degenerates to zero radius");
        ell.center[j] = 2.0 * s * s / var_c;
        ell.radii[j] = 2.0 * std::abs(s) * std::sqrt(budget / var_c);
    }
    ell.validate();
    return ell;
}

JacobianMR jacobian_mr(const Vector& beta_bar, const CovarianceStructure& cov) {
    require(beta_bar.size() == cov.p(), ErrorKind::config, "jacobian: dimension mismatch");
    const Eigen::Index p = cov.p();
    JacobianMR jac;
    jac.expansion_point = beta_bar;
    jac.base_mr = mr_linear_vector(beta_bar, cov);
    jac.matrix.resize(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double cross = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (i == j) continue;
            cross += cov.sigma_xx(i, j) * beta_bar[i];
            jac.matrix(j, i) = -2.0 * cov.sigma_xx(i, j) * beta_bar[j];
        }
        jac.matrix(j, j) = 2.0 * (cov.sigma_xy[j] - cross);
    }
    return jac;
}

namespace {

Matrix inverse_checked(const Matrix& m, const std::string& what) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smallest = svd.singularValues().minCoeff();
    const double largest = svd.singularValues().maxCoeff();
    require(smallest > 0.0 && largest / smallest < 1e12, ErrorKind::numeric,
            what + ": matrix is singular or ill-conditioned");
    return m.inverse();
}

}  // namespace

Vector mr_inverse_approx(const Vector& mr, const JacobianMR& jac) {
    require(mr.size() == jac.base_mr.size(), ErrorKind::config,
            "mr_inverse: dimension mismatch");
    const Matrix jac_inverse = inverse_checked(jac.matrix, "mr_inverse");
    return jac.expansion_point + jac_inverse * (mr - jac.base_mr);
}

Ellipsoid vic_ellipsoid_approx(const RidgeSpec& spec, const std::optional<Vector>& beta_bar) {
    spec.validate();
    const Vector beta_star = best_ridge(spec.cov, spec.c);
    const Vector expansion = beta_bar.value_or(beta_star);
    const double l_star = spec.cov.sigma_yy - spec.cov.sigma_xy.dot(beta_star);
    const double slack = (1.0 + spec.epsilon) * l_star - ridge_loss(expansion, spec);
    require(slack > 0.0, ErrorKind::numeric,
            "vic: expansion point lies outside the near-optimal set");

    const JacobianMR jac = jacobian_mr(expansion, spec.cov);
    const Matrix jac_inverse = inverse_checked(jac.matrix, "vic");

    Matrix system = spec.cov.sigma_xx;
    system.diagonal().array() += spec.c;
    const Matrix quad = jac_inverse.transpose() * system * jac_inverse;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (quad + quad.transpose()));
    require(eig.info() == Eigen::Success, ErrorKind::numeric, "vic: eigensolver failed");
    const Vector lambda = eig.eigenvalues();
    require(lambda.minCoeff() > 1e-12 * std::abs(lambda.maxCoeff()), ErrorKind::numeric,
            "vic: linearized quadratic form is not positive definite");
    Matrix rotation = eig.eigenvectors();
    fix_eigenvector_signs(rotation);

    // Linear term in rotated coordinates; zero when expanding at the minimizer.
    const Vector b =
        ((spec.cov.sigma_xy.transpose() - expansion.transpose() * system) * jac_inverse *
         rotation)
            .transpose();

    const double rhs = slack + (b.array().square() / lambda.array()).sum();
    require(rhs > 0.0, ErrorKind::numeric, "vic: degenerate ellipsoid");

    Ellipsoid ell;
    ell.rotation = rotation;
    ell.center = jac.base_mr + rotation * (b.array() / lambda.array()).matrix();
    ell.radii = (rhs / lambda.array()).sqrt();

    // Re-sort by descending radius (ascending lambda is already that order,
    // but rhs is axis-independent so the order is preserved); validate only.
    ell.validate();
    return ell;
}

double approx_error_bound(Eigen::Index j, const Vector& jac_radii,
                          const CovarianceStructure& cov) {
    require(j >= 0 && j < cov.p(), ErrorKind::config, "bound: feature index out of range");
    require(jac_radii.size() == cov.p(), ErrorKind::config, "bound: dimension mismatch");
    require((jac_radii.array() >= 0.0).all(), ErrorKind::config,
            "bound: radii must be non-negative");
    double bound = 0.0;
    for (Eigen::Index i = 0; i < cov.p(); ++i)
        if (i != j)
            bound += std::abs(cov.sigma_xx(i, j)) * jac_radii[i] *
                     (jac_radii[i] + jac_radii[j]);
    return bound;
}

double taylor_remainder(Eigen::Index j, const Vector& t, const CovarianceStructure& cov) {
    require(j >= 0 && j < cov.p(), ErrorKind::config, "remainder: index out of range");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < cov.p(); ++i)
        if (i != j) sum += cov.sigma_xx(i, j) * t[i];
    return -2.0 * sum * t[j];
}

Vector rashomon_box_radii(const RidgeSpec& spec) {
    spec.validate();
    const double budget = spec.epsilon * min_ridge_loss(spec.cov, spec.c);
    require(budget > 0.0, ErrorKind::numeric, "vic: degenerate set (zero loss budget)");
    Matrix system = spec.cov.sigma_xx;
    system.diagonal().array() += spec.c;
    const Matrix inv = inverse_checked(system, "vic box");
    return (budget * inv.diagonal().array()).sqrt();
}

VICCloud vic_forward_map(const RidgeSpec& spec, int n_boundary, int n_interior,
                         std::uint64_t seed) {
    spec.validate();
    require(n_boundary >= 0 && n_interior >= 0, ErrorKind::config,
            "vic: sample counts must be >= 0");
    const Eigen::Index p = spec.cov.p();
    const Vector beta_star = best_ridge(spec.cov, spec.c);
    const double l_star = spec.cov.sigma_yy - spec.cov.sigma_xy.dot(beta_star);
    const double budget = spec.epsilon * l_star;
    require(budget > 0.0, ErrorKind::numeric,
            "vic: epsilon * L* is zero (perfect fit); the set is degenerate");

    Matrix system = spec.cov.sigma_xx;
    system.diagonal().array() += spec.c;
    Eigen::LLT<Matrix> llt(system);
    require(llt.info() == Eigen::Success, ErrorKind::numeric,
            "vic: sigma_xx + cI is not positive definite");
    // beta = beta* + sqrt(budget) * L^{-T} u maps |u| = 1 onto the iso-loss
    // surface: (beta - beta*)^T (L L^T) (beta - beta*) = budget |u|^2.
    const Matrix transform =
        std::sqrt(budget) *
        llt.matrixU().solve(Matrix::Identity(p, p));  // (L^T)^{-1}

    VICCloud cloud;
    cloud.model_class = "linear";
    cloud.variant = MRVariant::diff;
    cloud.epsilon = spec.epsilon;
    cloud.c = spec.c;
    cloud.seed = seed;
    cloud.sampler_settings = "{\"n_boundary\":" + std::to_string(n_boundary) +
                             ",\"n_interior\":" + std::to_string(n_interior) + "}";
    cloud.points.reserve(static_cast<std::size_t>(n_boundary + n_interior));

    Rng rng(seed);
    Vector u(p);
    auto emit = [&](bool interior) {
        for (Eigen::Index k = 0; k < p; ++k) u[k] = rng.normal();
        const double norm = u.norm();
        require(norm > 0.0, ErrorKind::numeric, "vic: zero draw");
        u /= norm;
        if (interior) {
            const double radial =
                std::pow(rng.uniform(), 1.0 / static_cast<double>(p));
            u *= radial;
        }
        ReliancePoint pt;
        pt.beta = beta_star + transform * u;
        pt.mr = mr_linear_vector(pt.beta, spec.cov);
        pt.loss = ridge_loss(pt.beta, spec);
        cloud.points.push_back(std::move(pt));
    };
    for (int k = 0; k < n_boundary; ++k) emit(false);
    for (int k = 0; k < n_interior; ++k) emit(true);

    for (Eigen::Index j = 0; j < p; ++j)
        cloud.feature_names.push_back("x" + std::to_string(j + 1));
    return cloud;
}

MembershipDiagnostic vic_membership_diagnostic(const Vector& mr_target,
                                               const RidgeSpec& spec,
                                               const std::optional<Vector>& beta_bar,
                                               int max_iter, double tol) {
    spec.validate();
    const Vector beta_star = best_ridge(spec.cov, spec.c);
    const Vector expansion = beta_bar.value_or(beta_star);
    const JacobianMR jac0 = jacobian_mr(expansion, spec.cov);

    MembershipDiagnostic diag;
    diag.beta = mr_inverse_approx(mr_target, jac0);
    for (int it = 0; it < max_iter; ++it) {
        const Vector residual = mr_linear_vector(diag.beta, spec.cov) - mr_target;
        diag.residual = residual.cwiseAbs().maxCoeff();
        if (diag.residual <= tol) {
            diag.converged = true;
            break;
        }
        const JacobianMR jac = jacobian_mr(diag.beta, spec.cov);
        Eigen::FullPivLU<Matrix> lu(jac.matrix);
        if (!lu.isInvertible()) break;
        diag.beta -= lu.solve(residual);
    }
    if (diag.converged) diag.contained = contains_linear(diag.beta, spec);
    return diag;
}

}  // namespace vicloud
