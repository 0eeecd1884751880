#include "core/reliance.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace vicloud {

namespace {

/// log(1 + exp(-z)) without overflow for large |z|.
double softplus_neg(double z) {
    if (z < -30.0) return -z;
    if (z > 30.0) return std::exp(-z);
    return std::log1p(std::exp(-z));
}

}  // namespace

double LogisticPredictor::row_loss(const Eigen::Ref<const Vector>& x, double y) const {
    require(x.size() + 1 == beta_.size(), ErrorKind::config,
            "logistic: expected " + std::to_string(beta_.size() - 1) + " features");
    const double margin = y * (beta_[0] + beta_.tail(beta_.size() - 1).dot(x));
    return softplus_neg(margin);
}

double mean_loss(const Predictor& model, const Dataset& d) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        const double l = model.row_loss(d.features.row(i).transpose(), d.outcome[i]);
        require(std::isfinite(l), ErrorKind::numeric, "loss: non-finite row loss");
        total += l;
    }
    return total / static_cast<double>(d.n());
}

double mr_linear(const Vector& beta, const CovarianceStructure& cov, Eigen::Index j) {
    require(beta.size() == cov.p(), ErrorKind::config, "mr: dimension mismatch");
    require(j >= 0 && j < cov.p(), ErrorKind::config, "mr: feature index out of range");
    double cross = 0.0;
    for (Eigen::Index i = 0; i < cov.p(); ++i)
        if (i != j) cross += beta[i] * cov.sigma_xx(i, j);
    return 2.0 * cov.sigma_xy[j] * beta[j] - 2.0 * cross * beta[j];
}

Vector mr_linear_vector(const Vector& beta, const CovarianceStructure& cov) {
    Vector out(cov.p());
    for (Eigen::Index j = 0; j < cov.p(); ++j) out[j] = mr_linear(beta, cov, j);
    return out;
}

double mr_empirical_permute(const Predictor& model, const Dataset& d, Eigen::Index j,
                            int n_shuffles, std::uint64_t seed, MRVariant variant) {
    require(j >= 0 && j < d.p(), ErrorKind::config, "mr: feature index out of range");
    require(n_shuffles >= 1, ErrorKind::config, "mr: n_shuffles must be >= 1");

    const double original = mean_loss(model, d);
    double shuffled_sum = 0.0;
    Dataset work = d;
    for (int k = 0; k < n_shuffles; ++k) {
        work.features.col(j) = d.features.col(j);
        Rng rng(seed + static_cast<std::uint64_t>(k));
        for (Eigen::Index i = d.n() - 1; i > 0; --i) {
            const Eigen::Index swap_with =
                static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
            std::swap(work.features(i, j), work.features(swap_with, j));
        }
        shuffled_sum += mean_loss(model, work);
    }
    const double shuffled = shuffled_sum / n_shuffles;
    if (variant == MRVariant::diff) return shuffled - original;
    require(original != 0.0, ErrorKind::numeric,
            "mr: ratio variant undefined, original loss is zero");
    return shuffled / original;
}

double mr_binary_exact(const Predictor& model, const Dataset& d, Eigen::Index j) {
    require(d.kind == DataKind::binary_pm1, ErrorKind::data,
            "mr: exact shuffled loss needs binary data");
    require(j >= 0 && j < d.p(), ErrorKind::config, "mr: feature index out of range");

    const double original = mean_loss(model, d);
    require(original != 0.0, ErrorKind::numeric,
            "mr: ratio variant undefined, original loss is zero");

    Dataset work = d;
    work.features.col(j).setOnes();
    const double loss_one = mean_loss(model, work);
    work.features.col(j).setZero();
    const double loss_zero = mean_loss(model, work);
    const double p_one = d.features.col(j).mean();
    return (p_one * loss_one + (1.0 - p_one) * loss_zero) / original;
}

MRVector mr_vector_empirical(const Predictor& model, const Dataset& d, MRVariant variant,
                             int n_shuffles, std::uint64_t seed) {
    MRVector out;
    out.variant = variant;
    out.model_loss = mean_loss(model, d);
    out.values.resize(d.p());
    const bool exact = d.kind == DataKind::binary_pm1 && variant == MRVariant::ratio;
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        out.values[j] =
            exact ? mr_binary_exact(model, d, j)
                  : mr_empirical_permute(model, d, j, n_shuffles,
                                         derive_seed(seed, static_cast<std::uint64_t>(j)),
                                         variant);
    }
    return out;
}

MRVector mr_vector_linear(const Vector& beta, const CovarianceStructure& cov, double c) {
    MRVector out;
    out.variant = MRVariant::diff;
    out.values = mr_linear_vector(beta, cov);
    out.model_loss = beta.dot(cov.sigma_xx * beta) + c * beta.squaredNorm() -
                     2.0 * cov.sigma_xy.dot(beta) + cov.sigma_yy;
    return out;
}

}  // namespace vicloud
