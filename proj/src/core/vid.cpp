#include "core/vid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "core/rng.hpp"

namespace vicloud {

namespace {

std::string fmt(const char* format, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
};

}  // namespace

std::vector<std::array<double, 2>> VIDGrid::panel(Eigen::Index row,
                                                  Eigen::Index column) const {
    std::vector<std::array<double, 2>> points;
    points.reserve(static_cast<std::size_t>(mr.rows()));
    for (Eigen::Index i = 0; i < mr.rows(); ++i)
        points.push_back({mr(i, column), mr(i, row)});
    return points;
}

VIDGrid project_pairs(const Matrix& mr, const std::vector<std::string>& feature_names,
                      const std::vector<Eigen::Index>& features) {
    require(mr.rows() > 0, ErrorKind::config, "vid: empty point cloud");
    require(static_cast<Eigen::Index>(feature_names.size()) == mr.cols(),
            ErrorKind::config, "vid: name count mismatch");
    require(!features.empty(), ErrorKind::config, "vid: no features selected");
    for (const Eigen::Index f : features)
        require(f >= 0 && f < mr.cols(), ErrorKind::config,
                "vid: feature index out of range");
    VIDGrid grid;
    grid.mr = mr;
    grid.feature_names = feature_names;
    grid.feature_order = features;
    return grid;
}

std::vector<BoundsRow> bounds_table(const Matrix& mr,
                                    const std::vector<std::string>& feature_names) {
    require(mr.rows() > 0, ErrorKind::config, "bounds: empty point cloud");
    require(static_cast<Eigen::Index>(feature_names.size()) == mr.cols(),
            ErrorKind::config, "bounds: name count mismatch");
    std::vector<BoundsRow> rows;
    for (Eigen::Index j = 0; j < mr.cols(); ++j)
        rows.push_back({feature_names[static_cast<std::size_t>(j)],
                        mr.col(j).maxCoeff(), mr.col(j).minCoeff()});
    std::sort(rows.begin(), rows.end(), [](const BoundsRow& a, const BoundsRow& b) {
        if (a.upper != b.upper) return a.upper > b.upper;
        return a.name < b.name;
    });
    return rows;
}

std::string bounds_table_csv(const std::vector<BoundsRow>& rows) {
    std::string out = "feature,upper,lower\n";
    for (const auto& row : rows) {
        out += row.name;
        out += ',';
        out += fmt("%.17g", row.upper);
        out += ',';
        out += fmt("%.17g", row.lower);
        out += '\n';
    }
    return out;
}

KMeansResult cluster_kmeans(const Matrix& mr, int k, std::uint64_t seed) {
    const Eigen::Index n = mr.rows();
    require(k >= 1, ErrorKind::config, "kmeans: k must be >= 1");
    require(k <= n, ErrorKind::config, "kmeans: k exceeds the number of points");

    Rng rng(seed);
    KMeansResult result;
    result.centroids.resize(k, mr.cols());

    // k-means++ seeding: first centroid uniform, then squared-distance bias.
    std::vector<Eigen::Index> chosen;
    chosen.push_back(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    Vector nearest_sq = (mr.rowwise() - mr.row(chosen[0])).rowwise().squaredNorm();
    while (static_cast<int>(chosen.size()) < k) {
        const double total = nearest_sq.sum();
        Eigen::Index pick = 0;
        if (total <= 0.0) {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        } else {
            double target = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= nearest_sq[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        chosen.push_back(pick);
        nearest_sq =
            nearest_sq.cwiseMin((mr.rowwise() - mr.row(pick)).rowwise().squaredNorm());
    }
    for (int c = 0; c < k; ++c) result.centroids.row(c) = mr.row(chosen[static_cast<std::size_t>(c)]);

    result.labels.assign(static_cast<std::size_t>(n), 0);
    for (int iteration = 0; iteration < 1000; ++iteration) {
        bool changed = false;
        double wcss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_sq = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double sq = (mr.row(i) - result.centroids.row(c)).squaredNorm();
                if (sq < best_sq) {
                    best_sq = sq;
                    best = c;
                }
            }
            wcss += best_sq;
            if (result.labels[static_cast<std::size_t>(i)] != best) {
                result.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        result.wcss_per_iteration.push_back(wcss);
        if (!changed && iteration > 0) break;

        Matrix sums = Matrix::Zero(k, mr.cols());
        std::vector<long> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(result.labels[static_cast<std::size_t>(i)]) += mr.row(i);
            ++counts[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)  // empty clusters keep their centroid
                result.centroids.row(c) =
                    sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    return result;
}

std::string render_vid_csv(const VIDGrid& grid) {
    std::string out = "row_feature,col_feature,x,y,cluster\n";
    for (const Eigen::Index row : grid.feature_order) {
        for (const Eigen::Index column : grid.feature_order) {
            if (row == column) continue;
            const auto& row_name = grid.feature_names[static_cast<std::size_t>(row)];
            const auto& col_name = grid.feature_names[static_cast<std::size_t>(column)];
            for (Eigen::Index i = 0; i < grid.mr.rows(); ++i) {
                out += row_name;
                out += ',';
                out += col_name;
                out += ',';
                out += fmt("%.17g", grid.mr(i, column));
                out += ',';
                out += fmt("%.17g", grid.mr(i, row));
                out += ',';
                if (!grid.cluster_labels.empty())
                    out += std::to_string(grid.cluster_labels[static_cast<std::size_t>(i)]);
                out += '\n';
            }
        }
    }
    return out;
}

std::string render_vid_svg(const VIDGrid& grid) {
    constexpr double panel = 150.0, gap = 34.0, margin_left = 58.0, margin_top = 30.0,
                     margin_bottom = 46.0;
    const auto selected = static_cast<Eigen::Index>(grid.feature_order.size());
    const Eigen::Index cols = std::max<Eigen::Index>(selected - 1, 1);
    const double width = margin_left + cols * panel + (cols - 1) * gap + 20.0;
    const double height = margin_top + selected * panel + (selected - 1) * gap + margin_bottom;

    // Shared per-feature ranges, padded 5% each side.
    std::vector<std::array<double, 2>> ranges(grid.feature_names.size());
    for (const Eigen::Index f : grid.feature_order) {
        double lo = grid.mr.col(f).minCoeff();
        double hi = grid.mr.col(f).maxCoeff();
        double pad = 0.05 * (hi - lo);
        if (pad <= 0.0) pad = 0.5;
        ranges[static_cast<std::size_t>(f)] = {lo - pad, hi + pad};
    }
    auto scale = [&](double v, Eigen::Index f, bool vertical) {
        const auto& r = ranges[static_cast<std::size_t>(f)];
        const double t = (v - r[0]) / (r[1] - r[0]);
        return vertical ? panel * (1.0 - t) : panel * t;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           fmt("%.0f", width) + "\" height=\"" + fmt("%.0f", height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    Eigen::Index panel_row = 0;
    for (const Eigen::Index row : grid.feature_order) {
        Eigen::Index panel_col = 0;
        for (const Eigen::Index column : grid.feature_order) {
            if (row == column) continue;
            const double x0 = margin_left + panel_col * (panel + gap);
            const double y0 = margin_top + panel_row * (panel + gap);
            svg += "<g transform=\"translate(" + fmt("%.1f", x0) + "," + fmt("%.1f", y0) +
                   ")\">\n";
            svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt("%.0f", panel) + "\" height=\"" +
                   fmt("%.0f", panel) + "\" fill=\"none\" stroke=\"#444444\" "
                   "stroke-width=\"1\"/>\n";
            for (Eigen::Index i = 0; i < grid.mr.rows(); ++i) {
                const char* color = kPalette[0];
                if (!grid.cluster_labels.empty())
                    color = kPalette[static_cast<std::size_t>(
                        grid.cluster_labels[static_cast<std::size_t>(i)]) % kPalette.size()];
                svg += "<circle cx=\"" + fmt("%.2f", scale(grid.mr(i, column), column, false)) +
                       "\" cy=\"" + fmt("%.2f", scale(grid.mr(i, row), row, true)) +
                       "\" r=\"1.6\" fill=\"" + color + "\" fill-opacity=\"0.75\"/>\n";
            }
            const auto& row_name = grid.feature_names[static_cast<std::size_t>(row)];
            const auto& col_name = grid.feature_names[static_cast<std::size_t>(column)];
            svg += "<text x=\"" + fmt("%.1f", panel / 2) + "\" y=\"" +
                   fmt("%.1f", panel + 16.0) +
                   "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">" +
                   col_name + "</text>\n";
            svg += "<text x=\"-10\" y=\"" + fmt("%.1f", panel / 2) +
                   "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\" "
                   "transform=\"rotate(-90 -10 " + fmt("%.1f", panel / 2) + ")\">" +
                   row_name + "</text>\n";
            const auto& rx = ranges[static_cast<std::size_t>(column)];
            const auto& ry = ranges[static_cast<std::size_t>(row)];
            svg += "<text x=\"0\" y=\"" + fmt("%.1f", panel + 28.0) +
                   "\" font-size=\"7\" font-family=\"sans-serif\">" + fmt("%.4g", rx[0]) +
                   "</text>\n";
            svg += "<text x=\"" + fmt("%.0f", panel) + "\" y=\"" + fmt("%.1f", panel + 28.0) +
                   "\" font-size=\"7\" font-family=\"sans-serif\" text-anchor=\"end\">" +
                   fmt("%.4g", rx[1]) + "</text>\n";
            svg += "<text x=\"-4\" y=\"" + fmt("%.0f", panel) +
                   "\" font-size=\"7\" font-family=\"sans-serif\" text-anchor=\"end\">" +
                   fmt("%.4g", ry[0]) + "</text>\n";
            svg += "<text x=\"-4\" y=\"8\" font-size=\"7\" font-family=\"sans-serif\" "
                   "text-anchor=\"end\">" + fmt("%.4g", ry[1]) + "</text>\n";
            svg += "</g>\n";
            ++panel_col;
        }
        ++panel_row;
    }
    svg += "</svg>\n";
    return svg;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw_data("io: cannot write file: " + path);
    file << content;
    if (!file) throw_data("io: write failed: " + path);
}

}  // namespace vicloud
