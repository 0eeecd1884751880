#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "core/rng.hpp"
#include "core/tree.hpp"

using namespace vicloud;

namespace {

/// Eleven rows over two binary features; only the second feature varies.
Dataset running_example() {
    return gen_binary({{"00", {3, 1}}, {"01", {2, 5}}}, 17);
}

Dataset random_binary(Rng& rng, Eigen::Index p, long max_per_cell) {
    std::map<std::string, std::pair<long, long>> cells;
    long total = 0;
    for (std::uint32_t pattern = 0; pattern < (1u << p); ++pattern) {
        std::string key;
        for (Eigen::Index j = 0; j < p; ++j) key += ((pattern >> j) & 1u) ? '1' : '0';
        const long pos =
            static_cast<long>(rng.below(static_cast<std::uint64_t>(max_per_cell + 1)));
        const long neg =
            static_cast<long>(rng.below(static_cast<std::uint64_t>(max_per_cell + 1)));
        cells[key] = {pos, neg};
        total += pos + neg;
    }
    if (total < 2) cells[std::string(static_cast<std::size_t>(p), '0')] = {2, 1};
    return gen_binary(cells, rng.next_u64());
}

/// Label vector over all patterns, the canonical identity of a table.
std::vector<int> signature(const CellTable& table, const FlipTree& tree) {
    std::vector<int> labels;
    for (std::uint32_t pattern = 0; pattern < table.n_cells(); ++pattern)
        labels.push_back(tree.label(table, pattern));
    return labels;
}

double row_by_row_loss(const CellTable& table, const FlipTree& tree, const Dataset& d) {
    const TreePredictor model(table, tree);
    return mean_loss(model, d) * static_cast<double>(d.n());
}

}  // namespace

TEST_CASE("tabulate_cells counts, gaps, and ties") {
    const Dataset d = running_example();
    const CellTable table = tabulate_cells(d, {1});
    REQUIRE(table.n_cells() == 2);
    CHECK(table.cells[0].count_pos == 3);
    CHECK(table.cells[0].count_neg == 1);
    CHECK(table.cells[0].gap == 2);
    CHECK(table.cells[1].count_pos == 2);
    CHECK(table.cells[1].count_neg == 5);
    CHECK(table.cells[1].gap == 3);
    CHECK(table.total_best_loss == doctest::Approx(3.0));

    // Unseen pattern: counts (0,0), gap 0, tie resolves to +1.
    const CellTable both = tabulate_cells(d, {0, 1});
    CHECK(both.cells[1].empty());  // x1 = 1 never occurs
    CHECK(both.cells[1].gap == 0);
    CHECK(both.cells[1].majority_label == 1);

    const Dataset all_positive = gen_binary({{"0", {4, 0}}, {"1", {3, 0}}}, 5);
    CHECK(tabulate_cells(all_positive, {0}).total_best_loss == doctest::Approx(0.0));

    Dataset continuous = d;
    continuous.kind = DataKind::continuous;
    CHECK_THROWS_AS(tabulate_cells(continuous, {0}), Error);
}

TEST_CASE("best_tree follows the majority rule") {
    const Dataset d = running_example();
    const CellTable table = tabulate_cells(d, {1});
    const FlipTree best = best_tree(table);
    CHECK(best.flipped_cells.empty());
    CHECK(best.loss == doctest::Approx(3.0));
    CHECK(best.label(table, 0) == 1);
    CHECK(best.label(table, 1) == -1);

    const Dataset balanced = gen_binary({{"0", {2, 2}}, {"1", {1, 0}}}, 1);
    const CellTable tie = tabulate_cells(balanced, {0});
    CHECK(best_tree(tie).label(tie, 0) == 1);  // tie goes to +1
    CHECK(tie.total_best_loss == doctest::Approx(2.0));
}

TEST_CASE("enumerate_trees: gap budget cuts exactly") {
    const Dataset d = running_example();
    const CellTable table = tabulate_cells(d, {1});
    // gaps (2, 3), L* = 3, eps = 0.7 -> budget 2.1 admits {} and {gap-2 cell}.
    const auto trees = enumerate_trees(table, 0.7);
    REQUIRE(trees.size() == 2);
    CHECK(trees[0].flipped_cells.empty());
    CHECK(trees[0].loss == doctest::Approx(3.0));
    CHECK(trees[1].flipped_cells == std::vector<std::uint32_t>{0});
    CHECK(trees[1].loss == doctest::Approx(5.0));
}

TEST_CASE("enumerate_trees: equal gaps admit the singletons but not the pair") {
    // Two cells, both with gap 2; L* = 3 and eps = 0.67 give budget 2.01.
    const Dataset d = gen_binary({{"0", {3, 1}}, {"1", {4, 2}}}, 9);
    const CellTable table = tabulate_cells(d, {0});
    REQUIRE(table.cells[0].gap == 2);
    REQUIRE(table.cells[1].gap == 2);
    REQUIRE(table.total_best_loss == doctest::Approx(3.0));

    const auto trees = enumerate_trees(table, 0.67);
    REQUIRE(trees.size() == 3);
    CHECK(trees[0].flipped_cells.empty());
    CHECK(trees[1].flipped_cells == std::vector<std::uint32_t>{0});
    CHECK(trees[2].flipped_cells == std::vector<std::uint32_t>{1});
}

TEST_CASE("enumeration is monotone in loss and additive against row loss") {
    Rng rng(1212);
    for (int trial = 0; trial < 20; ++trial) {
        const Dataset d = random_binary(rng, 3, 4);
        const CellTable table = tabulate_cells(d, {0, 1, 2});
        const auto trees = enumerate_trees(table, 0.5, true);
        double previous = -1.0;
        for (const auto& tree : trees) {
            CHECK(tree.loss >= previous);
            previous = tree.loss;
            double gap_sum = 0.0;
            for (const std::uint32_t cell : tree.flipped_cells)
                gap_sum += static_cast<double>(table.cells[cell].gap);
            CHECK(tree.loss == doctest::Approx(table.total_best_loss + gap_sum));
            CHECK(tree.loss == doctest::Approx(row_by_row_loss(table, tree, d)));
        }
    }
}

TEST_CASE("oracle: enumeration equals brute force over all label assignments") {
    Rng rng(3030);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset d = random_binary(rng, 2, 3);
        const CellTable table = tabulate_cells(d, {0, 1});
        for (int tenths = 0; tenths <= 10; ++tenths) {
            const double epsilon = tenths / 10.0;
            const double threshold = (1.0 + epsilon) * table.total_best_loss;

            std::set<std::vector<int>> brute;
            for (std::uint32_t assignment = 0; assignment < 16; ++assignment) {
                std::vector<int> labels(4);
                double loss = 0.0;
                for (std::uint32_t cell = 0; cell < 4; ++cell) {
                    labels[cell] = (assignment >> cell) & 1u ? 1 : -1;
                    loss += static_cast<double>(labels[cell] == 1
                                                    ? table.cells[cell].count_neg
                                                    : table.cells[cell].count_pos);
                }
                if (loss - table.total_best_loss <= epsilon * table.total_best_loss)
                    brute.insert(labels);
                (void)threshold;
            }

            std::set<std::vector<int>> enumerated;
            for (const auto& tree : enumerate_trees(table, epsilon, true))
                enumerated.insert(signature(table, tree));
            CHECK(enumerated == brute);
        }
    }
}

TEST_CASE("single-flip shift interval: frozen example and degenerate case") {
    const Dataset d = running_example();
    const CellTable table = tabulate_cells(d, {1});
    const FlipTree best = best_tree(table);
    const double mr_star = tree_mr_exact(table, best, 1);
    CHECK(mr_star == doctest::Approx(59.0 / 33.0).epsilon(1e-12));

    // Flip the x2 = 0 cell: e = 2, sibling gap e' = 3, p = P(x2 = 0) = 4/11.
    const auto [lo, hi] = mr_shift_single_flip(table, 0, 1, mr_star);
    const double denom = 3.0 + 2.0;
    const double center = (4.0 / 11.0 - mr_star) * 2.0 / denom;
    const double half = (7.0 / 11.0) * 3.0 / denom;
    CHECK(lo == doctest::Approx(center - half).epsilon(1e-12));
    CHECK(hi == doctest::Approx(center + half).epsilon(1e-12));

    FlipTree flipped;
    flipped.flipped_cells = {0};
    flipped.loss = table.total_best_loss + 2.0;
    const double exact_shift = tree_mr_exact(table, flipped, 1) - mr_star;
    CHECK(exact_shift >= lo);
    CHECK(exact_shift <= hi);

    // Balanced cell with balanced sibling: the interval collapses to [0, 0].
    const Dataset even = gen_binary({{"0", {2, 2}}, {"1", {3, 3}}}, 3);
    const CellTable even_table = tabulate_cells(even, {0});
    const double even_star = tree_mr_exact(even_table, best_tree(even_table), 0);
    const auto [zlo, zhi] = mr_shift_single_flip(even_table, 0, 0, even_star);
    CHECK(zlo == doctest::Approx(0.0));
    CHECK(zhi == doctest::Approx(0.0));
}

TEST_CASE("property: exact shifts land inside the interval (random tables)") {
    Rng rng(7070);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Dataset d = random_binary(rng, 3, 4);
        for (const auto& subset :
             std::vector<std::vector<Eigen::Index>>{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}}) {
            const CellTable table = tabulate_cells(d, subset);
            if (table.total_best_loss <= 0.0) continue;  // ratio undefined at L* = 0
            const FlipTree best = best_tree(table);
            for (std::uint32_t cell = 0; cell < table.n_cells(); ++cell) {
                if (table.cells[cell].empty()) continue;
                FlipTree flipped;
                flipped.flipped_cells = {cell};
                flipped.loss =
                    table.total_best_loss + static_cast<double>(table.cells[cell].gap);
                for (const Eigen::Index j : subset) {
                    const double mr_star = tree_mr_exact(table, best, j);
                    const auto [lo, hi] = mr_shift_single_flip(table, cell, j, mr_star);
                    const double shift = tree_mr_exact(table, flipped, j) - mr_star;
                    CHECK(shift >= lo - 1e-12);
                    CHECK(shift <= hi + 1e-12);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("tree reliance matches the generic binary shortcut") {
    Rng rng(9090);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset d = random_binary(rng, 3, 4);
        const CellTable table = tabulate_cells(d, {0, 2});
        if (table.total_best_loss <= 0.0) continue;
        const auto trees = enumerate_trees(table, 0.3);
        for (const auto& tree : trees) {
            const TreePredictor model(table, tree);
            for (Eigen::Index j = 0; j < 3; ++j)
                CHECK(tree_mr_exact(table, tree, j) ==
                      doctest::Approx(mr_binary_exact(model, d, j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("scan: one row per distinct function, all within the threshold") {
    const Dataset d = gen_binary(
        {{"00", {6, 2}}, {"01", {3, 4}}, {"10", {1, 5}}, {"11", {2, 2}}}, 23);
    const TreeCloud cloud = tree_rashomon_scan(d, 0.5, 2);
    REQUIRE(!cloud.entries.empty());

    const double threshold = (1.0 + cloud.epsilon) * cloud.benchmark_loss;
    std::set<std::vector<int>> signatures;
    for (const auto& entry : cloud.entries) {
        CHECK(entry.loss <= threshold);
        // Rebuild the function over the full pattern space and dedup-check.
        const CellTable table = tabulate_cells(d, entry.feature_subset);
        FlipTree tree;
        for (std::uint32_t cell = 0; cell < table.n_cells(); ++cell)
            if (entry.flip_mask & (std::uint64_t{1} << cell))
                tree.flipped_cells.push_back(cell);
        std::vector<int> full_signature;
        for (std::uint32_t full = 0; full < 4; ++full) {
            std::uint32_t pattern = 0;
            for (std::size_t k = 0; k < entry.feature_subset.size(); ++k)
                if ((full >> entry.feature_subset[k]) & 1u) pattern |= (1u << k);
            full_signature.push_back(tree.label(table, pattern));
        }
        CHECK(signatures.insert(full_signature).second);  // no duplicates
        CHECK(entry.mr.size() == 2);
    }

    // The majority table over both features is the benchmark.
    CHECK(cloud.benchmark_loss ==
          doctest::Approx(tabulate_cells(d, {0, 1}).total_best_loss));

    // Deterministic output.
    const TreeCloud again = tree_rashomon_scan(d, 0.5, 2);
    REQUIRE(again.entries.size() == cloud.entries.size());
    for (std::size_t i = 0; i < cloud.entries.size(); ++i) {
        CHECK(again.entries[i].flip_mask == cloud.entries[i].flip_mask);
        CHECK(again.entries[i].loss == cloud.entries[i].loss);
    }
}
