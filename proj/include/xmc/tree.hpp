#pragma once

#include "xmc/classifier.hpp"
#include "xmc/dataset.hpp"
#include "xmc/rng.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace xmc {

// Probability that a random instance at this node is misclassified by a
// random label draw: sum_k p_k (1 - p_k). Counts may be any nonnegative
// weights with a positive total.
double gini_impurity(std::span<const double> class_counts);

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0; // C - (n_l/n) C_l - (n_r/n) C_r over the given rows
};

// Binary tree node. Classification nodes carry class counts/proportions and
// Gini impurity; regression nodes (boosting stages) carry a value and
// variance impurity. weighted_n is the fraction of training rows reaching
// the node.
struct TreeNode {
    std::vector<double> class_counts;
    std::vector<double> class_proportions;
    double value = 0.0;
    double weighted_n = 0.0;
    double impurity = 0.0;
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;

    bool is_leaf() const { return left == nullptr; }
    const TreeNode& descend(std::span<const double> row) const;
};

struct TreeParams {
    int max_depth = -1;        // -1 = unlimited
    int max_features = -1;     // absolute count, clamped to total; -1 = all
    int min_samples_split = 2;
    int min_samples_leaf = 1;
};

// Best (feature, midpoint threshold) over the candidate features, maximizing
// the impurity decrease with the given rows treated as the whole population.
// Ties go to the lowest feature index, then the lowest threshold. Returns
// nullopt when the rows are single-class or no split satisfies
// min_samples_leaf.
std::optional<SplitCandidate> best_split(const Dataset& ds, std::span<const int> rows,
                                         std::span<const int> candidate_features,
                                         int min_samples_leaf);

class ForestModel;
struct ForestParams;

class DecisionTreeModel : public Classifier {
public:
    DecisionTreeModel() = default;

    std::string kind() const override { return "dt"; }
    int n_classes() const override { return n_classes_; }
    int n_features() const override { return n_features_; }
    ClassDistribution predict_proba(std::span<const double> row) const override;

    const TreeNode& root() const { return *root_; }
    const TreeParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }
    int depth() const;

    friend DecisionTreeModel fit_tree(const Dataset& train, const TreeParams& params,
                                      std::uint64_t seed);
    friend ForestModel fit_forest(const Dataset& train, const ForestParams& params,
                                  std::uint64_t seed, int n_threads);
    friend struct TreeCodec;

private:
    std::unique_ptr<TreeNode> root_;
    TreeParams params_;
    int n_classes_ = 0;
    int n_features_ = 0;
    std::uint64_t seed_ = 0;
};

// Greedy CART growth: per-node feature subsampling without replacement under
// the tree RNG; stops at max_depth, purity, or constraint failure.
DecisionTreeModel fit_tree(const Dataset& train, const TreeParams& params, std::uint64_t seed);

// Squared-error regression tree on per-row targets; shares TreeNode with the
// classification tree (value = mean target, impurity = variance).
std::unique_ptr<TreeNode> fit_regression_tree(const Dataset& ds, std::span<const double> targets,
                                              int max_depth, int min_samples_split,
                                              int min_samples_leaf);

struct ForestParams {
    int n_estimators = 500;
    TreeParams tree;
    bool bootstrap = true;
};

class ForestModel : public Classifier {
public:
    ForestModel() = default;

    std::string kind() const override { return "rf"; }
    int n_classes() const override { return n_classes_; }
    int n_features() const override { return n_features_; }
    ClassDistribution predict_proba(std::span<const double> row) const override;

    const std::vector<DecisionTreeModel>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    friend ForestModel fit_forest(const Dataset& train, const ForestParams& params,
                                  std::uint64_t seed, int n_threads);
    friend struct TreeCodec;

private:
    std::vector<DecisionTreeModel> trees_;
    ForestParams params_;
    int n_classes_ = 0;
    int n_features_ = 0;
    std::uint64_t seed_ = 0;
};

// Bootstrap-resampled trees with per-node feature subsampling. Per-tree RNG
// streams derive from (seed, tree index), so the result is identical whether
// trees fit in parallel or not.
ForestModel fit_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed,
                       int n_threads = 0);

struct GbmParams {
    double learning_rate = 0.1;
    int n_estimators = 150;
    int max_depth = 1;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
};

// Multinomial-deviance gradient boosting: per-class squared-error regression
// trees on softmax residuals, mean-residual leaf values.
class GbmModel : public Classifier {
public:
    GbmModel() = default;

    std::string kind() const override { return "gb"; }
    int n_classes() const override { return n_classes_; }
    int n_features() const override { return n_features_; }
    ClassDistribution predict_proba(std::span<const double> row) const override;

    // stages()[m][k] is round m's regression tree for class k.
    const std::vector<std::vector<std::unique_ptr<TreeNode>>>& stages() const { return stages_; }
    std::span<const double> initial_scores() const { return initial_scores_; }
    const GbmParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }

    // Raw additive scores through the first `n_stages` rounds (-1 = all).
    std::vector<double> decision_scores(std::span<const double> row, int n_stages = -1) const;

    friend GbmModel fit_gbm(const Dataset& train, const GbmParams& params, std::uint64_t seed);
    friend struct TreeCodec;

private:
    std::vector<std::vector<std::unique_ptr<TreeNode>>> stages_;
    std::vector<double> initial_scores_; // per-class prior log-odds
    GbmParams params_;
    int n_classes_ = 0;
    int n_features_ = 0;
    std::uint64_t seed_ = 0;
};

GbmModel fit_gbm(const Dataset& train, const GbmParams& params, std::uint64_t seed);

// Mean multinomial deviance (log-loss) of probability predictions.
double multinomial_deviance(const std::vector<ClassDistribution>& probs,
                            std::span<const int> labels);

std::vector<double> softmax(std::span<const double> scores);

} // namespace xmc
