#include "core/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>

namespace vicloud {

namespace {

std::uint32_t row_pattern(const Dataset& d, Eigen::Index row,
                          const std::vector<Eigen::Index>& subset) {
    std::uint32_t pattern = 0;
    for (std::size_t k = 0; k < subset.size(); ++k)
        if (d.features(row, subset[k]) == 1.0) pattern |= (1u << k);
    return pattern;
}

}  // namespace

int FlipTree::label(const CellTable& table, std::uint32_t pattern) const {
    const int base = table.cells[pattern].majority_label;
    const bool flipped =
        std::binary_search(flipped_cells.begin(), flipped_cells.end(), pattern);
    return flipped ? -base : base;
}

CellTable tabulate_cells(const Dataset& d, const std::vector<Eigen::Index>& feature_subset) {
    require(d.kind == DataKind::binary_pm1, ErrorKind::data,
            "tree: cell tabulation needs binary data");
    require(feature_subset.size() <= 20, ErrorKind::config,
            "tree: feature subset too large (limit 20)");
    for (const Eigen::Index j : feature_subset)
        require(j >= 0 && j < d.p(), ErrorKind::config,
                "tree: feature index out of range");

    CellTable table;
    table.feature_subset = feature_subset;
    table.cells.assign(std::size_t{1} << feature_subset.size(), Cell{});
    table.n_rows = static_cast<long>(d.n());
    table.feature_ones.assign(feature_subset.size(), 0);

    for (Eigen::Index i = 0; i < d.n(); ++i) {
        Cell& cell = table.cells[row_pattern(d, i, feature_subset)];
        if (d.outcome[i] == 1.0)
            ++cell.count_pos;
        else
            ++cell.count_neg;
        for (std::size_t k = 0; k < feature_subset.size(); ++k)
            if (d.features(i, feature_subset[k]) == 1.0) ++table.feature_ones[k];
    }

    double best_loss = 0.0;
    for (Cell& cell : table.cells) {
        cell.gap = std::labs(cell.count_pos - cell.count_neg);
        cell.majority_label = cell.count_pos >= cell.count_neg ? 1 : -1;
        best_loss += static_cast<double>(std::min(cell.count_pos, cell.count_neg));
    }
    table.total_best_loss = best_loss;
    return table;
}

FlipTree best_tree(const CellTable& table) {
    FlipTree tree;
    tree.loss = table.total_best_loss;
    return tree;
}

namespace {

struct Candidate {
    std::uint32_t pattern = 0;
    long gap = 0;
};

std::vector<FlipTree> enumerate_with_budget(const CellTable& table, double gap_budget,
                                            bool include_empty_cells) {
    std::vector<Candidate> candidates;
    for (std::uint32_t pattern = 0; pattern < table.n_cells(); ++pattern) {
        const Cell& cell = table.cells[pattern];
        if (cell.empty() && !include_empty_cells) continue;
        candidates.push_back({pattern, cell.gap});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.gap != b.gap ? a.gap < b.gap : a.pattern < b.pattern;
    });

    struct Node {
        double gap_total = 0.0;
        std::vector<int> ranks;                   // indices into candidates, increasing
        std::vector<std::uint32_t> patterns;      // sorted, for deterministic ordering
        bool operator>(const Node& other) const {
            if (gap_total != other.gap_total) return gap_total > other.gap_total;
            return patterns > other.patterns;
        }
    };

    std::vector<FlipTree> out;
    if (gap_budget < 0.0) return out;

    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> frontier;
    frontier.push(Node{});
    while (!frontier.empty()) {
        Node node = frontier.top();
        frontier.pop();

        FlipTree tree;
        tree.flipped_cells = node.patterns;
        tree.loss = table.total_best_loss + node.gap_total;
        out.push_back(std::move(tree));

        // Extend only with higher-ranked cells: every subset is reached once.
        const int first = node.ranks.empty() ? 0 : node.ranks.back() + 1;
        for (int r = first; r < static_cast<int>(candidates.size()); ++r) {
            const double expanded = node.gap_total + static_cast<double>(candidates[r].gap);
            if (expanded > gap_budget) break;  // candidates are gap-sorted
            Node child;
            child.gap_total = expanded;
            child.ranks = node.ranks;
            child.ranks.push_back(r);
            child.patterns = node.patterns;
            child.patterns.insert(std::upper_bound(child.patterns.begin(),
                                                   child.patterns.end(),
                                                   candidates[r].pattern),
                                  candidates[r].pattern);
            frontier.push(std::move(child));
        }
    }
    return out;
}

}  // namespace

std::vector<FlipTree> enumerate_trees(const CellTable& table, double epsilon,
                                      bool include_empty_cells) {
    require(epsilon >= 0.0, ErrorKind::config, "tree: epsilon must be >= 0");
    return enumerate_with_budget(table, epsilon * table.total_best_loss,
                                 include_empty_cells);
}

double TreePredictor::row_loss(const Eigen::Ref<const Vector>& x, double y) const {
    std::uint32_t pattern = 0;
    for (std::size_t k = 0; k < table_->feature_subset.size(); ++k)
        if (x[table_->feature_subset[k]] == 1.0) pattern |= (1u << k);
    return tree_.label(*table_, pattern) == (y > 0.0 ? 1 : -1) ? 0.0 : 1.0;
}

namespace {

/// 0-1 loss (count scale) of a flip tree with the values in subset slot
/// `slot` forced to `value` on every row; slot = -1 forces nothing.
double forced_loss(const CellTable& table, const FlipTree& tree, int slot, int value) {
    double loss = 0.0;
    for (std::uint32_t pattern = 0; pattern < table.n_cells(); ++pattern) {
        const Cell& cell = table.cells[pattern];
        if (cell.empty()) continue;
        std::uint32_t lookup = pattern;
        if (slot >= 0) {
            lookup &= ~(1u << slot);
            if (value == 1) lookup |= (1u << slot);
        }
        const int label = tree.label(table, lookup);
        loss += static_cast<double>(label == 1 ? cell.count_neg : cell.count_pos);
    }
    return loss;
}

int subset_slot(const CellTable& table, Eigen::Index j) {
    for (std::size_t k = 0; k < table.feature_subset.size(); ++k)
        if (table.feature_subset[k] == j) return static_cast<int>(k);
    return -1;
}

}  // namespace

double tree_mr_exact(const CellTable& table, const FlipTree& tree, Eigen::Index j) {
    const double original = forced_loss(table, tree, -1, 0);
    require(original > 0.0, ErrorKind::numeric,
            "tree: ratio reliance undefined for a zero-loss tree");
    const int slot = subset_slot(table, j);
    if (slot < 0) return 1.0;  // the table never reads feature j
    const double p_one = static_cast<double>(table.feature_ones[static_cast<std::size_t>(slot)]) /
                         static_cast<double>(table.n_rows);
    const double loss_one = forced_loss(table, tree, slot, 1);
    const double loss_zero = forced_loss(table, tree, slot, 0);
    return (p_one * loss_one + (1.0 - p_one) * loss_zero) / original;
}

std::pair<double, double> mr_shift_single_flip(const CellTable& table, std::uint32_t cell,
                                               Eigen::Index j, double mr_star_j) {
    require(cell < table.n_cells(), ErrorKind::config, "tree: pattern out of range");
    const int slot = subset_slot(table, j);
    require(slot >= 0, ErrorKind::config, "tree: feature not in the table's subset");

    const double e = static_cast<double>(table.cells[cell].gap);
    const std::uint32_t sibling = cell ^ (1u << slot);
    const double e_sibling = static_cast<double>(table.cells[sibling].gap);
    const double denom = table.total_best_loss + e;
    require(denom > 0.0, ErrorKind::numeric, "tree: L* + e is zero, shift undefined");

    const int cell_value = (cell >> slot) & 1u;
    const double p_one = static_cast<double>(table.feature_ones[static_cast<std::size_t>(slot)]) /
                         static_cast<double>(table.n_rows);
    const double p = cell_value == 1 ? p_one : 1.0 - p_one;

    const double center = (p - mr_star_j) * e / denom;
    // The sibling's contribution carries an ambiguous sign; the conservative
    // frequency max(p, 1-p) keeps the exact shift inside the interval on
    // either side of p = 1/2.
    const double half_width = std::max(p, 1.0 - p) * e_sibling / denom;
    return {center - half_width, center + half_width};
}

Matrix TreeCloud::mr_matrix() const {
    const Eigen::Index rows = static_cast<Eigen::Index>(entries.size());
    const Eigen::Index cols = rows == 0 ? 0 : entries.front().mr.size();
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        out.row(i) = entries[static_cast<std::size_t>(i)].mr.transpose();
    return out;
}

namespace {

/// True iff the table's labels change along subset slot `slot` somewhere.
bool depends_on_slot(const CellTable& table, const FlipTree& tree, int slot) {
    for (std::uint32_t pattern = 0; pattern < table.n_cells(); ++pattern) {
        if ((pattern >> slot) & 1u) continue;
        if (tree.label(table, pattern) != tree.label(table, pattern | (1u << slot)))
            return true;
    }
    return false;
}

void subsets_up_to(Eigen::Index p, int max_size,
                   std::vector<std::vector<Eigen::Index>>& out) {
    out.push_back({});
    std::vector<std::vector<Eigen::Index>> previous = {{}};
    for (int size = 1; size <= max_size; ++size) {
        std::vector<std::vector<Eigen::Index>> current;
        for (const auto& base : previous) {
            const Eigen::Index start = base.empty() ? 0 : base.back() + 1;
            for (Eigen::Index j = start; j < p; ++j) {
                auto subset = base;
                subset.push_back(j);
                current.push_back(subset);
            }
        }
        for (const auto& s : current) out.push_back(s);
        previous = std::move(current);
    }
}

}  // namespace

TreeCloud tree_rashomon_scan(const Dataset& d, double epsilon, int max_features) {
    require(d.kind == DataKind::binary_pm1, ErrorKind::data, "tree: scan needs binary data");
    require(epsilon >= 0.0, ErrorKind::config, "tree: epsilon must be >= 0");
    require(max_features >= 1, ErrorKind::config, "tree: max_features must be >= 1");
    require(max_features <= 6, ErrorKind::config,
            "tree: max_features is capped at 6 (flip masks are 64-bit)");
    require(max_features <= d.p(), ErrorKind::config,
            "tree: max_features exceeds the feature count");

    std::vector<std::vector<Eigen::Index>> subsets;
    subsets_up_to(d.p(), max_features, subsets);

    std::vector<CellTable> tables;
    tables.reserve(subsets.size());
    double global_best = std::numeric_limits<double>::infinity();
    for (const auto& subset : subsets) {
        tables.push_back(tabulate_cells(d, subset));
        global_best = std::min(global_best, tables.back().total_best_loss);
    }

    TreeCloud cloud;
    cloud.feature_names = d.names;
    cloud.epsilon = epsilon;
    cloud.benchmark_loss = global_best;
    cloud.max_features = max_features;

    const double threshold = (1.0 + epsilon) * global_best;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        const CellTable& table = tables[s];
        const double budget = threshold - table.total_best_loss;
        if (budget < 0.0) continue;
        for (FlipTree& tree : enumerate_with_budget(table, budget, false)) {
            bool full_support = true;
            for (int slot = 0; slot < static_cast<int>(table.m()); ++slot)
                if (!depends_on_slot(table, tree, slot)) {
                    full_support = false;
                    break;
                }
            if (!full_support) continue;  // attributed to the smaller subset

            TreeCloudEntry entry;
            entry.subset_id = static_cast<int>(s);
            entry.feature_subset = table.feature_subset;
            for (const std::uint32_t pattern : tree.flipped_cells)
                entry.flip_mask |= (std::uint64_t{1} << pattern);
            entry.loss = tree.loss;
            entry.mr.resize(d.p());
            for (Eigen::Index j = 0; j < d.p(); ++j)
                entry.mr[j] = tree_mr_exact(table, tree, j);
            cloud.entries.push_back(std::move(entry));
        }
    }
    return cloud;
}

}  // namespace vicloud
