#include "core/inference.hpp"

#include <cmath>

namespace vicloud {

namespace {

struct SampleMoments {
    Matrix cov_xx;  // centered, 1/n
    Vector cov_xy;
    Vector var_x;  // diagonal of cov_xx
};

SampleMoments sample_moments(const Dataset& d) {
    const double n = static_cast<double>(d.n());
    const Eigen::RowVector<double, Eigen::Dynamic> feature_means =
        d.features.colwise().mean();
    const Matrix centered = d.features.rowwise() - feature_means;
    const Vector outcome_centered = d.outcome.array() - d.outcome.mean();
    SampleMoments m;
    m.cov_xx = (centered.transpose() * centered) / n;
    m.cov_xy = (centered.transpose() * outcome_centered) / n;
    m.var_x = m.cov_xx.diagonal();
    return m;
}

}  // namespace

double empirical_mr_quadratic(const Vector& beta, const Dataset& d, Eigen::Index j) {
    require(j >= 0 && j < d.p(), ErrorKind::config, "test: feature index out of range");
    require(beta.size() == d.p(), ErrorKind::config, "test: dimension mismatch");
    const SampleMoments m = sample_moments(d);
    return 2.0 * m.cov_xy[j] * beta[j] - 2.0 * beta.dot(m.cov_xx.col(j)) * beta[j] +
           2.0 * m.var_x[j] * beta[j] * beta[j];
}

Vector empirical_mr_gradient(const Vector& beta, const Dataset& d, Eigen::Index j) {
    require(j >= 0 && j < d.p(), ErrorKind::config, "test: feature index out of range");
    const SampleMoments m = sample_moments(d);
    Vector gradient(d.p());
    for (Eigen::Index k = 0; k < d.p(); ++k)
        gradient[k] = -2.0 * m.cov_xx(k, j) * beta[j];
    gradient[j] = 2.0 * m.cov_xy[j] - 2.0 * beta.dot(m.cov_xx.col(j)) +
                  2.0 * m.var_x[j] * beta[j];
    return gradient;
}

Matrix sandwich_variance(const Dataset& d) {
    const double n = static_cast<double>(d.n());
    const Matrix sxx = (d.features.transpose() * d.features) / n;
    Eigen::LDLT<Matrix> ldlt(sxx);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                ldlt.vectorD().minCoeff() > 1e-12 * std::max(1.0, sxx.trace()),
            ErrorKind::numeric, "test: X^T X is singular (collinear features)");

    const Vector beta_hat = ldlt.solve((d.features.transpose() * d.outcome) / n);
    const Vector residuals = d.outcome - d.features * beta_hat;

    Matrix meat = Matrix::Zero(d.p(), d.p());
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        const double r2 = residuals[i] * residuals[i];
        meat.noalias() += r2 * d.features.row(i).transpose() * d.features.row(i);
    }
    meat /= n;

    const Matrix sxx_inverse = ldlt.solve(Matrix::Identity(d.p(), d.p()));
    return sxx_inverse * meat * sxx_inverse;
}

RelianceTest mr_wald_statistic(const Dataset& d, Eigen::Index j, double null_value) {
    require(j >= 0 && j < d.p(), ErrorKind::config, "test: feature index out of range");
    const double n = static_cast<double>(d.n());

    const Matrix sxx = (d.features.transpose() * d.features) / n;
    Eigen::LDLT<Matrix> ldlt(sxx);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                ldlt.vectorD().minCoeff() > 1e-12 * std::max(1.0, sxx.trace()),
            ErrorKind::numeric, "test: X^T X is singular (collinear features)");
    const Vector beta_hat = ldlt.solve((d.features.transpose() * d.outcome) / n);

    RelianceTest result;
    result.j = j;
    result.n = d.n();
    result.mr_hat = empirical_mr_quadratic(beta_hat, d, j);

    const Vector gradient = empirical_mr_gradient(beta_hat, d, j);
    const Matrix var_beta = sandwich_variance(d);
    result.sigma_hat = gradient.dot(var_beta * gradient);
    require(result.sigma_hat > 1e-14, ErrorKind::numeric,
            "test: degenerate variance (no usable signal for feature " +
                std::to_string(j + 1) + ")");

    const double delta = result.mr_hat - null_value;
    result.z_stat = n * delta * delta / result.sigma_hat;
    result.p_value = 1.0 - chi_square_1_cdf(result.z_stat);
    return result;
}

double chi_square_1_cdf(double z) {
    if (z <= 0.0) return 0.0;
    // For Z ~ chi2_1, P(Z <= z) = erf(sqrt(z / 2)).
    return std::erf(std::sqrt(0.5 * z));
}

}  // namespace vicloud
