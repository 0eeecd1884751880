#include "core/linear.hpp"

#include <cmath>

namespace vicloud {

bool Ellipsoid::contains(const Vector& x, double tol) const {
    require(x.size() == dim(), ErrorKind::config, "ellipsoid: dimension mismatch");
    const Vector local = rotation.transpose() * (x - center);
    return (local.array() / radii.array()).matrix().squaredNorm() <= 1.0 + tol;
}

Vector Ellipsoid::map_from_unit(const Vector& u) const {
    require(u.size() == dim(), ErrorKind::config, "ellipsoid: dimension mismatch");
    return center + rotation * (radii.asDiagonal() * u);
}

void Ellipsoid::validate() const {
    const Eigen::Index p = dim();
    require(radii.size() == p && rotation.rows() == p && rotation.cols() == p,
            ErrorKind::numeric, "ellipsoid: inconsistent dimensions");
    require((radii.array() > 0.0).all(), ErrorKind::numeric,
            "ellipsoid: radii must be positive");
    const Matrix gram = rotation.transpose() * rotation;
    require((gram - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <= 1e-8,
            ErrorKind::numeric, "ellipsoid: rotation is not orthonormal");
}

double ridge_loss(const Vector& beta, const CovarianceStructure& cov, double c) {
    require(beta.size() == cov.p(), ErrorKind::config, "ridge_loss: dimension mismatch");
    return beta.dot(cov.sigma_xx * beta) + c * beta.squaredNorm() -
           2.0 * cov.sigma_xy.dot(beta) + cov.sigma_yy;
}

double ridge_loss(const Vector& beta, const RidgeSpec& spec) {
    return ridge_loss(beta, spec.cov, spec.c);
}

Vector best_ridge(const CovarianceStructure& cov, double c) {
    require(c >= 0.0, ErrorKind::config, "ridge: c must be >= 0");
    Matrix system = cov.sigma_xx;
    system.diagonal().array() += c;
    Eigen::LDLT<Matrix> ldlt(system);
    const double scale = std::max(1.0, system.cwiseAbs().maxCoeff());
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * scale)
        throw_numeric("ridge: sigma_xx + cI is singular; increase c or drop collinear features");
    return ldlt.solve(cov.sigma_xy);
}

double min_ridge_loss(const CovarianceStructure& cov, double c) {
    const Vector beta_star = best_ridge(cov, c);
    return cov.sigma_yy - cov.sigma_xy.dot(beta_star);
}

void fix_eigenvector_signs(Matrix& vectors, double tol) {
    for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
        const double threshold = tol * vectors.col(k).cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double v = vectors(i, k);
            if (std::abs(v) > threshold) {
                if (v < 0.0) vectors.col(k) = -vectors.col(k);
                break;
            }
        }
    }
}

Ellipsoid rashomon_ellipsoid_linear(const RidgeSpec& spec) {
    spec.validate();
    const Vector beta_star = best_ridge(spec.cov, spec.c);
    const double l_star = spec.cov.sigma_yy - spec.cov.sigma_xy.dot(beta_star);
    const double budget = spec.epsilon * l_star;
    require(budget > 0.0, ErrorKind::numeric,
            "rashomon: epsilon * L* is zero (perfect fit); the set is degenerate");

    Matrix system = spec.cov.sigma_xx;
    system.diagonal().array() += spec.c;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(system);
    require(eig.info() == Eigen::Success, ErrorKind::numeric, "rashomon: eigensolver failed");
    require(eig.eigenvalues().minCoeff() > 0.0, ErrorKind::numeric,
            "rashomon: sigma_xx + cI is not positive definite");

    Ellipsoid ell;
    ell.center = beta_star;
    ell.rotation = eig.eigenvectors();  // ascending eigenvalues -> descending radii
    fix_eigenvector_signs(ell.rotation);
    ell.radii = (budget / eig.eigenvalues().array()).sqrt();
    ell.validate();
    return ell;
}

bool contains_linear(const Vector& beta, const RidgeSpec& spec) {
    spec.validate();
    const double threshold = (1.0 + spec.epsilon) * min_ridge_loss(spec.cov, spec.c);
    return ridge_loss(beta, spec) <= threshold + 1e-10 * std::abs(threshold);
}

}  // namespace vicloud
