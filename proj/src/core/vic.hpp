#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/linear.hpp"
#include "core/reliance.hpp"

namespace vicloud {

/// First-order expansion of the reliance map at `expansion_point`.
/// Row j holds the gradient of the j-th reliance coordinate.
struct JacobianMR {
    Matrix matrix;           // p x p
    Vector expansion_point;  // beta_bar
    Vector base_mr;          // reliance vector at beta_bar
};

/// (coefficients, reliance vector, loss) triple.
struct ReliancePoint {
    Vector beta;
    Vector mr;
    double loss = 0.0;
};

/// Reliance vectors of a sampled set of near-optimal models, with enough
/// provenance to regenerate the sample.
struct VICCloud {
    std::vector<ReliancePoint> points;

    // provenance
    std::string model_class;  // "linear", "logistic", "tree"
    MRVariant variant = MRVariant::diff;
    double epsilon = 0.0;
    double c = 0.0;
    std::uint64_t seed = 0;
    std::string sampler_settings;  // JSON fragment, sampler-specific
    std::vector<std::string> feature_names;

    Eigen::Index size() const { return static_cast<Eigen::Index>(points.size()); }
    Eigen::Index mr_dim() const { return points.empty() ? 0 : points.front().mr.size(); }

    /// Matrix view of the reliance vectors, one row per point.
    Matrix mr_matrix() const;
};

/// Closed-form reliance ellipsoid when all feature cross-moments vanish:
/// center_j = 2 sigma_jY^2 / (var_j + c),
/// radius_j = 2 |sigma_jY| sqrt(epsilon L* / (var_j + c)).
/// Axis-aligned: rotation is the identity, axes in coordinate order.
Ellipsoid vic_center_radii_uncorrelated(const CovarianceStructure& cov, double c,
                                        double epsilon);

/// Gradient matrix of the reliance map:
/// J[j][j] = 2 (sigma_jY - sum_{i != j} sigma_ij beta_i),
/// J[j][k] = -2 sigma_kj beta_j for k != j.
JacobianMR jacobian_mr(const Vector& beta_bar, const CovarianceStructure& cov);

/// Linearized inverse reliance map: beta_bar + J^{-1} (mr - base_mr).
/// Fails when J's condition number exceeds 1e12.
Vector mr_inverse_approx(const Vector& mr, const JacobianMR& jac);

/// Ellipsoid image of the coefficient sublevel set under the linearized
/// reliance map, expanded at `beta_bar` (the loss minimizer when empty).
/// The loss slack on the right-hand side is (1 + epsilon) L* - loss(beta_bar),
/// which reduces to epsilon L* at the minimizer.
Ellipsoid vic_ellipsoid_approx(const RidgeSpec& spec,
                               const std::optional<Vector>& beta_bar = std::nullopt);

/// Upper bound sum_{i != j} |sigma_ij| l_i (l_i + l_j) on the magnitude of
/// the quadratic expression sum_{i != j} sigma_ij t_i (t_i + t_j) over the
/// box |t_k| <= l_k. Zero for uncorrelated features.
double approx_error_bound(Eigen::Index j, const Vector& jac_radii,
                          const CovarianceStructure& cov);

/// Exact remainder of the first-order expansion of the reliance map:
/// mr_j(beta) - mr_j(beta_bar) - [J (beta - beta_bar)]_j
///   = -2 sum_{i != j} sigma_ij t_i t_j with t = beta - beta_bar.
double taylor_remainder(Eigen::Index j, const Vector& t, const CovarianceStructure& cov);

/// Half-widths of the axis-aligned bounding box of the coefficient sublevel
/// set: sqrt(epsilon L* * diag((sigma_xx + cI)^{-1})).
Vector rashomon_box_radii(const RidgeSpec& spec);

/// Samples the coefficient sublevel set (surface and interior) and maps each
/// point through the analytic reliance vector. Boundary points are unit
/// sphere draws pushed through the Cholesky factor of sigma_xx + cI, which
/// keeps sample k aligned across rescalings of the data; interior points add
/// a radial coordinate u^{1/p}.
VICCloud vic_forward_map(const RidgeSpec& spec, int n_boundary, int n_interior,
                         std::uint64_t seed);

/// Newton solve of mr(beta) = target starting from the linearized inverse.
struct MembershipDiagnostic {
    bool converged = false;
    Vector beta;
    double residual = 0.0;
    bool contained = false;
};
MembershipDiagnostic vic_membership_diagnostic(
    const Vector& mr_target, const RidgeSpec& spec,
    const std::optional<Vector>& beta_bar = std::nullopt, int max_iter = 50,
    double tol = 1e-12);

}  // namespace vicloud
