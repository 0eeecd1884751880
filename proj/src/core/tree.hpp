#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/reliance.hpp"

namespace vicloud {

/// Outcome tally for one feature pattern.
struct Cell {
    long count_pos = 0;
    long count_neg = 0;
    long gap = 0;            // |count_pos - count_neg|
    int majority_label = 1;  // +1 on ties

    bool empty() const { return count_pos == 0 && count_neg == 0; }
};

/// Per-pattern outcome counts over a feature subset. A decision table over m
/// binary features stands in for the equivalence class of trees splitting on
/// those features; pattern bit k is the value of feature_subset[k].
struct CellTable {
    std::vector<Eigen::Index> feature_subset;  // 0-based feature indices
    std::vector<Cell> cells;                   // size 2^m, indexed by pattern
    double total_best_loss = 0.0;              // sum over cells of min(pos, neg)
    long n_rows = 0;
    std::vector<long> feature_ones;  // dataset-wide count of ones per subset slot

    Eigen::Index m() const { return static_cast<Eigen::Index>(feature_subset.size()); }
    std::uint32_t n_cells() const { return static_cast<std::uint32_t>(cells.size()); }
};

/// A decision table expressed as the majority rule with some cells flipped.
struct FlipTree {
    std::vector<std::uint32_t> flipped_cells;  // sorted patterns
    double loss = 0.0;                         // L* + sum of flipped gaps

    int label(const CellTable& table, std::uint32_t pattern) const;
};

/// Counts outcomes per pattern of the selected features (m <= 20).
/// Ties resolve the majority label to +1; unseen patterns get counts (0,0).
CellTable tabulate_cells(const Dataset& d, const std::vector<Eigen::Index>& feature_subset);

/// The majority-rule table: empty flip set, loss = L*.
FlipTree best_tree(const CellTable& table);

/// Every flip set whose gap total stays within epsilon * L*, in non-decreasing
/// loss order (ties broken by lexicographic flip set). Cells with no
/// observations are loss-neutral and excluded unless `include_empty_cells`;
/// including them multiplies the output by 2^(#empty) loss-identical tables.
std::vector<FlipTree> enumerate_trees(const CellTable& table, double epsilon,
                                      bool include_empty_cells = false);

/// 0-1 loss predictor backed by a decision table.
class TreePredictor : public Predictor {
public:
    TreePredictor(const CellTable& table, FlipTree tree)
        : table_(&table), tree_(std::move(tree)) {}
    double row_loss(const Eigen::Ref<const Vector>& x, double y) const override;
    std::string class_tag() const override { return "tree"; }

private:
    const CellTable* table_;
    FlipTree tree_;
};

/// Exact ratio-variant reliance of a flip tree on feature j (0-based, over
/// the full dataset feature indexing) computed from cell counts alone.
double tree_mr_exact(const CellTable& table, const FlipTree& tree, Eigen::Index j);

/// Interval that contains the change in reliance on feature j caused by
/// flipping a single cell, relative to the majority table;
/// center (p - mr*_j) e / (L* + e), half-width max(p, 1-p) e' / (L* + e)
/// with e the cell gap, e' the sibling gap (0 when the sibling is empty) and
/// p the dataset frequency of the cell's value of feature j.
std::pair<double, double> mr_shift_single_flip(const CellTable& table, std::uint32_t cell,
                                               Eigen::Index j, double mr_star_j);

/// One enumerated tree in a cross-subset scan.
struct TreeCloudEntry {
    int subset_id = 0;
    std::vector<Eigen::Index> feature_subset;
    std::uint64_t flip_mask = 0;  // bit k set -> pattern k flipped
    double loss = 0.0;
    Vector mr;  // ratio variant, full p entries (1.0 off the subset)
};

struct TreeCloud {
    std::vector<TreeCloudEntry> entries;
    std::vector<std::string> feature_names;
    double epsilon = 0.0;
    double benchmark_loss = 0.0;  // global best loss across subsets
    int max_features = 0;

    Matrix mr_matrix() const;
};

/// Enumerates near-optimal decision tables over every feature subset of size
/// <= max_features, using the best loss across all subsets as the benchmark.
/// Each distinct predictive function is reported once: a table is attributed
/// to the subset of features it actually splits on. max_features <= 6 so that
/// flip sets fit the CSV bitmask.
TreeCloud tree_rashomon_scan(const Dataset& d, double epsilon, int max_features);

}  // namespace vicloud
