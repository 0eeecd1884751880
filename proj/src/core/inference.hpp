#pragma once

#include "core/dataset.hpp"

namespace vicloud {

/// Result of the zero-reliance hypothesis test for one feature.
struct RelianceTest {
    Eigen::Index j = 0;      // 0-based feature index
    double mr_hat = 0.0;     // empirical reliance of the least-squares fit
    double sigma_hat = 0.0;  // variance estimate of sqrt(n) * mr_hat
    double z_stat = 0.0;     // n (mr_hat - null)^2 / sigma_hat
    double p_value = 1.0;    // 1 - chi2_1 CDF
    Eigen::Index n = 0;
};

/// Empirical reliance function: the analytic difference form with sample
/// covariances (1/n, centered) substituted for population moments.
double empirical_mr_quadratic(const Vector& beta, const Dataset& d, Eigen::Index j);

/// Gradient of empirical_mr_quadratic in beta (analytic).
Vector empirical_mr_gradient(const Vector& beta, const Dataset& d, Eigen::Index j);

/// Heteroskedasticity-robust estimate of the asymptotic covariance of the
/// least-squares coefficients: Sxx^{-1} S Sxx^{-1} with
/// S = (1/n) sum x_i x_i^T resid_i^2 and Sxx = (1/n) X^T X.
Matrix sandwich_variance(const Dataset& d);

/// Wald statistic for H0: reliance of the population least-squares model on
/// feature j equals `null_value`; asymptotically chi-square with 1 dof.
RelianceTest mr_wald_statistic(const Dataset& d, Eigen::Index j, double null_value = 0.0);

/// CDF of the chi-square distribution with 1 degree of freedom.
double chi_square_1_cdf(double z);

}  // namespace vicloud
