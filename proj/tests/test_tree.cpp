#include "xmc/tree.hpp"

#include "xmc/errors.hpp"
#include "xmc/rng.hpp"

#include <doctest.h>

#include <functional>

#include <cmath>
#include <numeric>

#include "test_helpers.hpp"

using namespace xmc;
using namespace xmc::test;

TEST_CASE("gini_impurity unit values") {
    CHECK(gini_impurity(std::vector<double>{5, 5}) == 0.5);
    CHECK(gini_impurity(std::vector<double>{7, 0}) == 0.0);
    // Direct evaluation on proportions (0.7, 0.2, 0.1): 1 - (0.49+0.04+0.01).
    CHECK(gini_impurity(std::vector<double>{0.7, 0.2, 0.1}) ==
          doctest::Approx(0.46).epsilon(1e-13));
    CHECK_THROWS_AS(static_cast<void>(gini_impurity(std::vector<double>{0, 0})), NumericError);
    CHECK_THROWS_AS(static_cast<void>(gini_impurity(std::vector<double>{-1, 2})), NumericError);
}

TEST_CASE("gini_impurity stays in [0, 1-1/K]") {
    Rng rng(11);
    for (int it = 0; it < 200; ++it) {
        const int k = 2 + rng.index(5);
        std::vector<double> counts;
        double total = 0;
        for (int i = 0; i < k; ++i) {
            counts.push_back(static_cast<double>(rng.index(20)));
            total += counts.back();
        }
        if (total == 0) counts[0] = 1;
        const double g = gini_impurity(counts);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0 - 1.0 / k + 1e-12);
    }
}

namespace {

// Exhaustive enumeration of every (feature, midpoint) split, impurities
// recomputed from scratch with gini_impurity. Independent of the production
// sweep.
std::optional<SplitCandidate> brute_force_split(const Dataset& ds, const std::vector<int>& rows,
                                                const std::vector<int>& features,
                                                int min_samples_leaf) {
    const int n = static_cast<int>(rows.size());
    std::vector<double> parent(static_cast<std::size_t>(ds.n_classes), 0.0);
    for (int r : rows) parent[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(r)] - 1)] += 1;
    const double parent_gini = gini_impurity(parent);
    if (parent_gini == 0) return std::nullopt;

    std::optional<SplitCandidate> best;
    auto sorted_features = features;
    std::sort(sorted_features.begin(), sorted_features.end());
    for (int f : sorted_features) {
        std::vector<double> values;
        for (int r : rows) values.push_back(ds.at(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            double threshold = values[i] + (values[i + 1] - values[i]) / 2.0;
            if (threshold >= values[i + 1]) threshold = values[i];
            std::vector<double> left(static_cast<std::size_t>(ds.n_classes), 0.0);
            std::vector<double> right(static_cast<std::size_t>(ds.n_classes), 0.0);
            int n_left = 0;
            for (int r : rows) {
                const auto k = static_cast<std::size_t>(ds.y[static_cast<std::size_t>(r)] - 1);
                if (ds.at(r, f) <= threshold) {
                    left[k] += 1;
                    ++n_left;
                } else {
                    right[k] += 1;
                }
            }
            const int n_right = n - n_left;
            if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
            const double decrease = parent_gini -
                                    (static_cast<double>(n_left) / n) * gini_impurity(left) -
                                    (static_cast<double>(n_right) / n) * gini_impurity(right);
            if (!best || decrease > best->decrease) best = SplitCandidate{f, threshold, decrease};
        }
    }
    return best;
}

std::vector<int> all_rows(const Dataset& ds) {
    std::vector<int> rows(static_cast<std::size_t>(ds.n_rows()));
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

std::vector<int> all_features(const Dataset& ds) {
    std::vector<int> f(static_cast<std::size_t>(ds.n_features()));
    std::iota(f.begin(), f.end(), 0);
    return f;
}

} // namespace

TEST_CASE("best_split on the textbook two-class column") {
    const auto ds = make_dataset({{0}, {0}, {1}, {1}}, {1, 1, 2, 2}, 2);
    const auto split = best_split(ds, all_rows(ds), all_features(ds), 1);
    REQUIRE(split.has_value());
    CHECK(split->feature == 0);
    CHECK(split->threshold == 0.5);
    CHECK(split->decrease == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("best_split returns nothing on pure rows") {
    const auto ds = make_dataset({{0}, {1}, {2}}, {1, 1, 1}, 2);
    CHECK_FALSE(best_split(ds, all_rows(ds), all_features(ds), 1).has_value());
}

TEST_CASE("best_split returns nothing when min_samples_leaf blocks every cut") {
    const auto ds = make_dataset({{0}, {1}, {2}}, {1, 2, 1}, 2);
    CHECK_FALSE(best_split(ds, all_rows(ds), all_features(ds), 2).has_value());
}

TEST_CASE("best_split matches brute-force enumeration on random data") {
    Rng rng(101);
    for (int it = 0; it < 30; ++it) {
        const int n = 5 + rng.index(120);
        const int k = 2 + rng.index(5);
        const auto ds = random_dataset(n, 3, k, derive_seed(202, static_cast<std::uint64_t>(it)));
        const int min_leaf = 1 + rng.index(3);
        const auto got = best_split(ds, all_rows(ds), all_features(ds), min_leaf);
        const auto want = brute_force_split(ds, all_rows(ds), all_features(ds), min_leaf);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->feature == want->feature);
            CHECK(got->threshold == want->threshold);
            CHECK(got->decrease == doctest::Approx(want->decrease).epsilon(1e-12));
        }
    }
}

TEST_CASE("fit_tree with max_depth 0 is a single prior leaf") {
    const auto ds = make_dataset({{0}, {1}, {2}, {3}}, {1, 1, 1, 2}, 2);
    const auto tree = fit_tree(ds, TreeParams{0, -1, 2, 1}, 1);
    CHECK(tree.root().is_leaf());
    const auto dist = tree.predict_proba(ds.row(0));
    CHECK(dist.probs[0] == 0.75);
    CHECK(dist.probs[1] == 0.25);
}

TEST_CASE("fit_tree reaches 100% training accuracy on separable data") {
    Rng rng(7);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 120; ++i) {
        const int cls = 1 + rng.index(3);
        // Classes occupy disjoint intervals in feature 0; feature 1 is noise.
        rows.push_back({cls * 10.0 + rng.uniform(), rng.uniform()});
        labels.push_back(cls);
    }
    const auto ds = make_dataset(rows, labels, 3);
    const auto tree = fit_tree(ds, TreeParams{-1, -1, 2, 1}, 1);
    for (int r = 0; r < ds.n_rows(); ++r) {
        CHECK(tree.predict(ds.row(r)) == ds.y[static_cast<std::size_t>(r)]);
    }
}

TEST_CASE("fit_tree honours the tuned configuration") {
    const auto ds = random_dataset(300, 4, 6, 33);
    // max_features above the total feature count is clamped.
    const TreeParams params{20, 61, 3, 3};
    const auto tree = fit_tree(ds, params, 5);
    CHECK(tree.depth() <= 20);
    CHECK(tree.params().min_samples_leaf == 3);

    std::function<void(const TreeNode&)> walk = [&](const TreeNode& node) {
        double total = 0;
        for (double c : node.class_counts) total += c;
        if (!node.is_leaf()) {
            CHECK(total >= 3); // min_samples_split
            walk(*node.left);
            walk(*node.right);
        } else {
            CHECK(total >= 3); // min_samples_leaf
        }
    };
    walk(tree.root());
}

TEST_CASE("greedy splits never increase weighted impurity") {
    const auto ds = random_dataset(250, 5, 4, 44);
    const auto tree = fit_tree(ds, TreeParams{-1, 3, 2, 1}, 9);
    std::function<void(const TreeNode&)> walk = [&](const TreeNode& node) {
        if (node.is_leaf()) return;
        const double parent = node.weighted_n * node.impurity;
        const double children = node.left->weighted_n * node.left->impurity +
                                node.right->weighted_n * node.right->impurity;
        CHECK(parent - children >= -1e-12);
        CHECK(node.left->weighted_n + node.right->weighted_n ==
              doctest::Approx(node.weighted_n).epsilon(1e-12));
        walk(*node.left);
        walk(*node.right);
    };
    walk(tree.root());
}

TEST_CASE("fit_tree is deterministic under seed") {
    const auto ds = random_dataset(200, 6, 3, 55);
    const auto a = fit_tree(ds, TreeParams{-1, 2, 2, 1}, 77);
    const auto b = fit_tree(ds, TreeParams{-1, 2, 2, 1}, 77);
    for (int r = 0; r < ds.n_rows(); ++r) {
        CHECK(a.predict_proba(ds.row(r)).probs == b.predict_proba(ds.row(r)).probs);
    }
}

TEST_CASE("predict_proba leaf proportions and width check") {
    auto ds = make_dataset({{0}, {0}, {0}, {0}}, {1, 1, 1, 2}, 6);
    const auto tree = fit_tree(ds, TreeParams{0, -1, 2, 1}, 1);
    const auto dist = tree.predict_proba(ds.row(0));
    REQUIRE(dist.probs.size() == 6);
    CHECK(dist.probs == std::vector<double>{0.75, 0.25, 0, 0, 0, 0});
    const std::vector<double> wrong_width = {1.0, 2.0};
    CHECK_THROWS_AS(static_cast<void>(tree.predict_proba(wrong_width)), DataError);
}

TEST_CASE("empty training set is an error") {
    Dataset empty;
    empty.schema = FeatureSchema::from_names({"a"});
    empty.n_classes = 2;
    CHECK_THROWS_AS(static_cast<void>(fit_tree(empty, TreeParams{}, 1)), DataError);
}
