#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "core/dataset.hpp"

namespace vicloud {

enum class MRVariant { diff, ratio };

/// Per-feature reliance values for one model, plus the loss of that model
/// under the loss function the values were computed with.
struct MRVector {
    Vector values;
    MRVariant variant = MRVariant::diff;
    double model_loss = 0.0;
};

/// Evaluator of a fitted model's per-row loss. Implementations must be
/// deterministic and produce finite losses on finite inputs.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual double row_loss(const Eigen::Ref<const Vector>& x, double y) const = 0;
    virtual std::string class_tag() const = 0;
    /// Parameter vector for parametric classes, nullptr otherwise.
    virtual const Vector* parameters() const { return nullptr; }
};

/// Squared-error linear model without intercept.
class LinearPredictor : public Predictor {
public:
    explicit LinearPredictor(Vector beta) : beta_(std::move(beta)) {}
    double row_loss(const Eigen::Ref<const Vector>& x, double y) const override {
        const double r = y - beta_.dot(x);
        return r * r;
    }
    std::string class_tag() const override { return "linear"; }
    const Vector* parameters() const override { return &beta_; }

private:
    Vector beta_;
};

/// Logistic model over outcomes in {-1,+1}; beta = (intercept, slopes).
class LogisticPredictor : public Predictor {
public:
    explicit LogisticPredictor(Vector beta_with_intercept)
        : beta_(std::move(beta_with_intercept)) {}
    double row_loss(const Eigen::Ref<const Vector>& x, double y) const override;
    std::string class_tag() const override { return "logistic"; }
    const Vector* parameters() const override { return &beta_; }

private:
    Vector beta_;
};

/// Mean per-row loss over the dataset.
double mean_loss(const Predictor& model, const Dataset& d);

/// Analytic reliance (difference form) of a linear model on feature j,
/// 2 sigma_jY beta_j - 2 sum_{i != j} beta_i sigma_ij beta_j.
/// `j` is 0-based.
double mr_linear(const Vector& beta, const CovarianceStructure& cov, Eigen::Index j);

/// All p analytic reliance values at once.
Vector mr_linear_vector(const Vector& beta, const CovarianceStructure& cov);

/// Permutation estimate: mean loss over `n_shuffles` independent column-j
/// permutations, combined with the unshuffled loss per `variant`. The k-th
/// shuffle uses seed + k, so a longer run extends a shorter one.
double mr_empirical_permute(const Predictor& model, const Dataset& d, Eigen::Index j,
                            int n_shuffles, std::uint64_t seed,
                            MRVariant variant = MRVariant::ratio);

/// Closed-form expected shuffled loss for binary data: force column j to 1
/// and to 0, blend by the empirical frequency of ones, divide by the
/// original loss. Equals the average of mr_empirical_permute over all n!
/// permutations.
double mr_binary_exact(const Predictor& model, const Dataset& d, Eigen::Index j);

/// Reliance vector for a model evaluated on a dataset. Uses the exact binary
/// shortcut when the data is binary and variant is ratio; the permutation
/// estimator otherwise.
MRVector mr_vector_empirical(const Predictor& model, const Dataset& d, MRVariant variant,
                             int n_shuffles, std::uint64_t seed);

/// Reliance vector of a linear model straight from second moments.
MRVector mr_vector_linear(const Vector& beta, const CovarianceStructure& cov, double c = 0.0);

}  // namespace vicloud
