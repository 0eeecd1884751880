#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace vicloud {

/// Pairwise scatter data for a reliance matrix (one row per model). The
/// panel keyed (row r, column c) plots mr[:, c] horizontally against
/// mr[:, r] vertically; the row variable owns the vertical axis.
struct VIDGrid {
    Matrix mr;                                // models x features
    std::vector<std::string> feature_names;   // all features
    std::vector<Eigen::Index> feature_order;  // selected features, in panel order
    std::vector<int> cluster_labels;          // optional, size models or empty

    Eigen::Index n_points() const { return mr.rows(); }
    Eigen::Index n_panels() const {
        const auto f = static_cast<Eigen::Index>(feature_order.size());
        return f * (f - 1);
    }
    /// Points of the panel with `row` on the vertical axis.
    std::vector<std::array<double, 2>> panel(Eigen::Index row, Eigen::Index column) const;
};

/// Builds the grid over every ordered pair of the selected features.
VIDGrid project_pairs(const Matrix& mr, const std::vector<std::string>& feature_names,
                      const std::vector<Eigen::Index>& features);

struct BoundsRow {
    std::string name;
    double upper = 0.0;
    double lower = 0.0;
};

/// Per-feature extremes of the reliance values, sorted by upper bound
/// descending (ties by name).
std::vector<BoundsRow> bounds_table(const Matrix& mr,
                                    const std::vector<std::string>& feature_names);

std::string bounds_table_csv(const std::vector<BoundsRow>& rows);

struct KMeansResult {
    std::vector<int> labels;
    Matrix centroids;                      // k x features
    std::vector<double> wcss_per_iteration;  // non-increasing
};

/// Lloyd iteration with a seeded k-means++ start; stops when assignments
/// stabilize. Deterministic given the seed.
KMeansResult cluster_kmeans(const Matrix& mr, int k, std::uint64_t seed);

/// Long-format CSV: "row_feature,col_feature,x,y,cluster" (cluster blank
/// when no labels are attached).
std::string render_vid_csv(const VIDGrid& grid);

/// Scatter-panel grid as standalone SVG 1.1, one <g> per panel. Axis ranges
/// are shared per feature and padded 5%; output bytes are a pure function of
/// the grid.
std::string render_vid_svg(const VIDGrid& grid);

/// Writes `content` to `path`, failing with a data error on IO problems.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace vicloud
