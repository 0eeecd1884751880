#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "core/error.hpp"

namespace vicloud {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class DataKind { continuous, binary_pm1 };

/// Tabular sample: n rows of p features plus one outcome column.
/// Immutable by convention; operations return fresh copies.
struct Dataset {
    Matrix features;                 // n x p
    Vector outcome;                  // n
    std::vector<std::string> names;  // p feature names
    std::string outcome_name = "y";
    DataKind kind = DataKind::continuous;

    Eigen::Index n() const { return features.rows(); }
    Eigen::Index p() const { return features.cols(); }

    /// Enforces construction invariants (finiteness, sizes, binary domains).
    void validate() const;
};

/// Second moments E[XX^T], E[YX], E[Y^2]. Everything the linear analysis
/// needs is captured here; rows of data are no longer required downstream.
struct CovarianceStructure {
    Matrix sigma_xx;  // p x p, symmetric PSD
    Vector sigma_xy;  // p
    double sigma_yy = 0.0;
    bool means_removed = false;

    Eigen::Index p() const { return sigma_xy.size(); }

    /// Validates symmetry and positive semi-definiteness
    /// (eigenvalues >= -1e-10 * trace).
    static CovarianceStructure create(Matrix sigma_xx, Vector sigma_xy, double sigma_yy,
                                      bool means_removed);
};

/// Reads a comma-delimited file with a header row. The outcome column is
/// selected by name, or by 0-based index if `outcome_column` parses as an
/// integer that is not a column name. Binary detection requires every
/// feature value set to be exactly {0,1} and the outcome set exactly {-1,+1};
/// `force_binary` accepts subsets as well (e.g. an all-zero column).
Dataset load_csv(const std::string& path, const std::string& outcome_column,
                 bool force_binary = false);

void save_csv(const Dataset& d, const std::string& path);

/// Centers and rescales every feature column and the outcome to sample mean 0
/// and sample variance 1 (variance computed with the 1/n convention).
Dataset normalize(const Dataset& d);

/// Maps the outcome to {-1,+1} by sign (0 maps to +1); features untouched.
Dataset binarize_outcome(const Dataset& d);

/// Empirical second moments with the 1/n convention, taken on the data as-is
/// (no centering). `means_removed` records whether the columns were already
/// centered.
CovarianceStructure covariance_of(const Dataset& d);

/// n i.i.d. draws from the zero-mean, unit-variance Gaussian whose joint
/// correlation matrix of (X, Y) is [[corr_xx, corr_xy], [corr_xy^T, 1]].
/// Deterministic given the seed.
Dataset gen_gaussian(const Matrix& corr_xx, const Vector& corr_xy, Eigen::Index n,
                     std::uint64_t seed);

/// Exact-count binary data: keys are {0,1}-strings of equal length p, values
/// are (positive count, negative count). Row order is a seeded shuffle.
Dataset gen_binary(const std::map<std::string, std::pair<long, long>>& cell_counts,
                   std::uint64_t seed);

}  // namespace vicloud
