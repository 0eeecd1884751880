#pragma once

#include "core/dataset.hpp"

namespace vicloud {

/// Ridge-regression problem plus the loss slack factor that cuts out the set
/// of near-optimal coefficient vectors.
struct RidgeSpec {
    CovarianceStructure cov;
    double c = 0.0;        // ridge penalty, >= 0
    double epsilon = 0.0;  // slack factor, > 0

    void validate() const {
        require(c >= 0.0, ErrorKind::config, "ridge: c must be >= 0");
        require(epsilon > 0.0, ErrorKind::config, "ridge: epsilon must be > 0");
    }
};

/// Axis-aligned-after-rotation ellipsoid: columns of `rotation` are the axis
/// directions, sorted by descending radius. Membership is
/// |rotation^T (x - center) ./ radii|^2 <= 1.
struct Ellipsoid {
    Vector center;
    Vector radii;
    Matrix rotation;

    Eigen::Index dim() const { return center.size(); }

    /// Relative boundary tolerance `tol` (1e-10 by default downstream).
    bool contains(const Vector& x, double tol = 1e-10) const;

    /// Point on the surface (or inside, for |u| < 1) from unit-ball coords.
    Vector map_from_unit(const Vector& u) const;

    void validate() const;
};

/// beta^T (sigma_xx + cI) beta - 2 sigma_xy^T beta + sigma_yy.
double ridge_loss(const Vector& beta, const RidgeSpec& spec);
double ridge_loss(const Vector& beta, const CovarianceStructure& cov, double c);

/// Unique minimizer (sigma_xx + cI)^{-1} sigma_xy; fails on singular systems.
Vector best_ridge(const CovarianceStructure& cov, double c);

/// Loss at the minimizer, sigma_yy - sigma_xy^T beta*.
double min_ridge_loss(const CovarianceStructure& cov, double c);

/// Exact sublevel set {beta : (beta - beta*)^T (sigma_xx + cI)(beta - beta*)
/// <= epsilon L*}. Axis directions are eigenvectors of sigma_xx + cI taken in
/// ascending eigenvalue order with a deterministic sign convention, so the
/// reported radii are descending.
Ellipsoid rashomon_ellipsoid_linear(const RidgeSpec& spec);

/// True iff ridge_loss(beta) <= (1 + epsilon) L* (relative slack 1e-10).
bool contains_linear(const Vector& beta, const RidgeSpec& spec);

/// Fixes eigenvector signs in-place: first component larger than
/// `tol * colwise max` is made positive. Keeps decompositions reproducible.
void fix_eigenvector_signs(Matrix& vectors, double tol = 1e-12);

}  // namespace vicloud
