#include "xmc/tree.hpp"

#include "xmc/errors.hpp"
#include "xmc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xmc {

double gini_impurity(std::span<const double> class_counts) {
    double total = 0;
    for (double c : class_counts) {
        if (c < 0) throw NumericError("negative class count");
        total += c;
    }
    if (total <= 0) throw NumericError("gini_impurity: zero total count");
    double impurity = 0;
    for (double c : class_counts) {
        const double p = c / total;
        impurity += p * (1.0 - p);
    }
    return impurity;
}

const TreeNode& TreeNode::descend(std::span<const double> row) const {
    const TreeNode* node = this;
    while (!node->is_leaf()) {
        node = row[static_cast<std::size_t>(node->feature)] <= node->threshold
                   ? node->left.get()
                   : node->right.get();
    }
    return *node;
}

namespace {

// Midpoint between consecutive distinct sorted values; falls back to the
// lower value if rounding would route the upper value left.
double split_threshold(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid >= hi ? lo : mid;
}

struct ValueLabel {
    double value;
    int label; // 0-based class
};

} // namespace

std::optional<SplitCandidate> best_split(const Dataset& ds, std::span<const int> rows,
                                         std::span<const int> candidate_features,
                                         int min_samples_leaf) {
    const auto n = static_cast<int>(rows.size());
    if (n == 0) throw DataError("best_split: no rows");
    const int n_classes = ds.n_classes;

    std::vector<double> parent_counts(static_cast<std::size_t>(n_classes), 0.0);
    for (int r : rows) parent_counts[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(r)] - 1)] += 1.0;
    const double parent_impurity = gini_impurity(parent_counts);
    if (parent_impurity == 0.0) return std::nullopt;

    std::vector<int> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());

    std::optional<SplitCandidate> best;
    std::vector<ValueLabel> column(static_cast<std::size_t>(n));
    std::vector<double> left_counts(static_cast<std::size_t>(n_classes));
    for (int f : features) {
        for (int i = 0; i < n; ++i) {
            const int r = rows[static_cast<std::size_t>(i)];
            column[static_cast<std::size_t>(i)] = {ds.at(r, f), ds.y[static_cast<std::size_t>(r)] - 1};
        }
        std::sort(column.begin(), column.end(),
                  [](const ValueLabel& a, const ValueLabel& b) { return a.value < b.value; });

        std::fill(left_counts.begin(), left_counts.end(), 0.0);
        double left_sq = 0.0; // sum of squared left counts, updated incrementally
        double right_sq = 0.0;
        for (double c : parent_counts) right_sq += c * c;

        for (int i = 0; i + 1 < n; ++i) {
            const auto label = static_cast<std::size_t>(column[static_cast<std::size_t>(i)].label);
            // Moving one row left: adjust the sum-of-squares terms.
            left_sq += 2.0 * left_counts[label] + 1.0;
            const double right_c = parent_counts[label] - left_counts[label];
            right_sq += -2.0 * right_c + 1.0;
            left_counts[label] += 1.0;

            const int n_left = i + 1;
            const int n_right = n - n_left;
            if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
            const double lo = column[static_cast<std::size_t>(i)].value;
            const double hi = column[static_cast<std::size_t>(i + 1)].value;
            if (!(hi > lo)) continue;

            // gini = 1 - sum(p^2); child impurities from the running
            // sum-of-squares.
            const double nl = n_left, nr = n_right;
            const double gini_left = 1.0 - left_sq / (nl * nl);
            const double gini_right = 1.0 - right_sq / (nr * nr);
            const double decrease =
                parent_impurity - (nl / n) * gini_left - (nr / n) * gini_right;
            if (!best || decrease > best->decrease) {
                best = SplitCandidate{f, split_threshold(lo, hi), decrease};
            }
        }
    }
    return best;
}

namespace {

struct TreeGrower {
    const Dataset& ds;
    const TreeParams& params;
    double n_total;
    Rng& rng;
    std::vector<int> pool; // scratch for feature subsampling

    std::vector<int> sample_features() {
        const int d = ds.n_features();
        int m = params.max_features < 0 ? d : std::min(params.max_features, d);
        m = std::max(m, 1);
        if (m >= d) {
            std::vector<int> all(static_cast<std::size_t>(d));
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        pool.resize(static_cast<std::size_t>(d));
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < m; ++i) {
            const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        std::vector<int> chosen(pool.begin(), pool.begin() + m);
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

    std::unique_ptr<TreeNode> grow(std::vector<int>& rows, int depth) {
        auto node = std::make_unique<TreeNode>();
        node->class_counts.assign(static_cast<std::size_t>(ds.n_classes), 0.0);
        for (int r : rows) {
            node->class_counts[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(r)] - 1)] += 1.0;
        }
        const double n = static_cast<double>(rows.size());
        node->class_proportions.resize(node->class_counts.size());
        for (std::size_t k = 0; k < node->class_counts.size(); ++k) {
            node->class_proportions[k] = node->class_counts[k] / n;
        }
        node->weighted_n = n / n_total;
        node->impurity = gini_impurity(node->class_counts);

        const bool depth_ok = params.max_depth < 0 || depth < params.max_depth;
        if (!depth_ok || node->impurity == 0.0 ||
            static_cast<int>(rows.size()) < params.min_samples_split) {
            return node;
        }
        const auto features = sample_features();
        const auto split = best_split(ds, rows, features, params.min_samples_leaf);
        if (!split) return node;

        node->feature = split->feature;
        node->threshold = split->threshold;
        std::vector<int> left_rows, right_rows;
        for (int r : rows) {
            if (ds.at(r, split->feature) <= split->threshold) left_rows.push_back(r);
            else right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        node->left = grow(left_rows, depth + 1);
        node->right = grow(right_rows, depth + 1);
        return node;
    }
};

int node_depth(const TreeNode& node) {
    if (node.is_leaf()) return 0;
    return 1 + std::max(node_depth(*node.left), node_depth(*node.right));
}

} // namespace

DecisionTreeModel fit_tree(const Dataset& train, const TreeParams& params, std::uint64_t seed) {
    if (train.n_rows() == 0) throw DataError("fit_tree: empty training set");
    DecisionTreeModel model;
    model.params_ = params;
    model.n_classes_ = train.n_classes;
    model.n_features_ = train.n_features();
    model.seed_ = seed;

    Rng rng(seed);
    TreeGrower grower{train, params, static_cast<double>(train.n_rows()), rng, {}};
    std::vector<int> rows(static_cast<std::size_t>(train.n_rows()));
    std::iota(rows.begin(), rows.end(), 0);
    model.root_ = grower.grow(rows, 0);
    return model;
}

int DecisionTreeModel::depth() const { return node_depth(*root_); }

ClassDistribution DecisionTreeModel::predict_proba(std::span<const double> row) const {
    check_width(row);
    return ClassDistribution{root_->descend(row).class_proportions};
}

ForestModel fit_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed,
                       int n_threads) {
    if (train.n_rows() == 0) throw DataError("fit_forest: empty training set");
    if (params.n_estimators < 1) throw DataError("fit_forest: n_estimators must be >= 1");
    ForestModel model;
    model.params_ = params;
    model.n_classes_ = train.n_classes;
    model.n_features_ = train.n_features();
    model.seed_ = seed;
    model.trees_.resize(static_cast<std::size_t>(params.n_estimators));

    const int n = train.n_rows();
    parallel_for(
        params.n_estimators,
        [&](int t) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
            std::vector<int> rows(static_cast<std::size_t>(n));
            if (params.bootstrap) {
                for (auto& r : rows) {
                    r = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
                }
            } else {
                std::iota(rows.begin(), rows.end(), 0);
            }
            DecisionTreeModel tree;
            tree.params_ = params.tree;
            tree.n_classes_ = train.n_classes;
            tree.n_features_ = train.n_features();
            tree.seed_ = derive_seed(seed, static_cast<std::uint64_t>(t));
            TreeGrower grower{train, params.tree, static_cast<double>(n), rng, {}};
            tree.root_ = grower.grow(rows, 0);
            model.trees_[static_cast<std::size_t>(t)] = std::move(tree);
        },
        n_threads);
    return model;
}

ClassDistribution ForestModel::predict_proba(std::span<const double> row) const {
    check_width(row);
    std::vector<double> probs(static_cast<std::size_t>(n_classes_), 0.0);
    for (const auto& tree : trees_) {
        const auto& leaf_probs = tree.root().descend(row).class_proportions;
        for (std::size_t k = 0; k < probs.size(); ++k) probs[k] += leaf_probs[k];
    }
    const auto n = static_cast<double>(trees_.size());
    for (auto& p : probs) p /= n;
    return ClassDistribution{std::move(probs)};
}

namespace {

struct RegressionGrower {
    const Dataset& ds;
    std::span<const double> targets;
    int max_depth;
    int min_samples_split;
    int min_samples_leaf;
    double n_total;

    struct Moments {
        double sum = 0, sum_sq = 0;
        double mean(double n) const { return sum / n; }
        double variance(double n) const {
            return std::max(0.0, sum_sq / n - (sum / n) * (sum / n));
        }
    };

    std::unique_ptr<TreeNode> grow(std::vector<int>& rows, int depth) {
        auto node = std::make_unique<TreeNode>();
        const double n = static_cast<double>(rows.size());
        Moments m;
        for (int r : rows) {
            const double t = targets[static_cast<std::size_t>(r)];
            m.sum += t;
            m.sum_sq += t * t;
        }
        node->value = m.mean(n);
        node->impurity = m.variance(n);
        node->weighted_n = n / n_total;

        const bool depth_ok = max_depth < 0 || depth < max_depth;
        if (!depth_ok || node->impurity <= 0.0 ||
            static_cast<int>(rows.size()) < min_samples_split) {
            return node;
        }
        const auto split = find_split(rows, node->impurity);
        if (!split) return node;

        node->feature = split->feature;
        node->threshold = split->threshold;
        std::vector<int> left_rows, right_rows;
        for (int r : rows) {
            if (ds.at(r, split->feature) <= split->threshold) left_rows.push_back(r);
            else right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        node->left = grow(left_rows, depth + 1);
        node->right = grow(right_rows, depth + 1);
        return node;
    }

    struct ValueTarget {
        double value;
        double target;
    };

    std::optional<SplitCandidate> find_split(const std::vector<int>& rows,
                                             double parent_variance) const {
        const auto n = static_cast<int>(rows.size());
        std::optional<SplitCandidate> best;
        std::vector<ValueTarget> column(static_cast<std::size_t>(n));
        Moments total;
        for (int r : rows) {
            const double t = targets[static_cast<std::size_t>(r)];
            total.sum += t;
            total.sum_sq += t * t;
        }
        for (int f = 0; f < ds.n_features(); ++f) {
            for (int i = 0; i < n; ++i) {
                const int r = rows[static_cast<std::size_t>(i)];
                column[static_cast<std::size_t>(i)] = {ds.at(r, f),
                                                       targets[static_cast<std::size_t>(r)]};
            }
            std::sort(column.begin(), column.end(),
                      [](const ValueTarget& a, const ValueTarget& b) { return a.value < b.value; });
            Moments left;
            for (int i = 0; i + 1 < n; ++i) {
                const double t = column[static_cast<std::size_t>(i)].target;
                left.sum += t;
                left.sum_sq += t * t;
                const int n_left = i + 1;
                const int n_right = n - n_left;
                if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
                const double lo = column[static_cast<std::size_t>(i)].value;
                const double hi = column[static_cast<std::size_t>(i + 1)].value;
                if (!(hi > lo)) continue;
                const double nl = n_left, nr = n_right;
                Moments right{total.sum - left.sum, total.sum_sq - left.sum_sq};
                const double decrease = parent_variance - (nl / n) * left.variance(nl) -
                                        (nr / n) * right.variance(nr);
                if (!best || decrease > best->decrease) {
                    best = SplitCandidate{f, split_threshold(lo, hi), decrease};
                }
            }
        }
        return best;
    }
};

} // namespace

std::unique_ptr<TreeNode> fit_regression_tree(const Dataset& ds, std::span<const double> targets,
                                              int max_depth, int min_samples_split,
                                              int min_samples_leaf) {
    if (ds.n_rows() == 0) throw DataError("fit_regression_tree: empty training set");
    RegressionGrower grower{ds,
                            targets,
                            max_depth,
                            min_samples_split,
                            min_samples_leaf,
                            static_cast<double>(ds.n_rows())};
    std::vector<int> rows(static_cast<std::size_t>(ds.n_rows()));
    std::iota(rows.begin(), rows.end(), 0);
    return grower.grow(rows, 0);
}

std::vector<double> softmax(std::span<const double> scores) {
    double max_score = scores[0];
    for (double s : scores) max_score = std::max(max_score, s);
    std::vector<double> out(scores.size());
    double total = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        out[k] = std::exp(scores[k] - max_score);
        total += out[k];
    }
    for (auto& v : out) v /= total;
    return out;
}

GbmModel fit_gbm(const Dataset& train, const GbmParams& params, std::uint64_t seed) {
    if (train.n_rows() == 0) throw DataError("fit_gbm: empty training set");
    if (train.n_classes < 2) throw DataError("fit_gbm: need at least 2 classes");
    if (params.n_estimators < 0) throw DataError("fit_gbm: negative n_estimators");

    GbmModel model;
    model.params_ = params;
    model.n_classes_ = train.n_classes;
    model.n_features_ = train.n_features();
    model.seed_ = seed;

    const int n = train.n_rows();
    const int K = train.n_classes;
    const auto counts = train.class_counts();
    model.initial_scores_.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const double prior = std::clamp(
            static_cast<double>(counts[static_cast<std::size_t>(k)]) / n, 1e-12, 1.0);
        model.initial_scores_[static_cast<std::size_t>(k)] = std::log(prior);
    }

    // scores[i*K + k] accumulates the additive model.
    std::vector<double> scores(static_cast<std::size_t>(n) * static_cast<std::size_t>(K));
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < K; ++k) {
            scores[static_cast<std::size_t>(i) * K + static_cast<std::size_t>(k)] =
                model.initial_scores_[static_cast<std::size_t>(k)];
        }
    }

    std::vector<double> residuals(static_cast<std::size_t>(n));
    for (int round = 0; round < params.n_estimators; ++round) {
        std::vector<std::vector<double>> probs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            probs[static_cast<std::size_t>(i)] = softmax(
                {scores.data() + static_cast<std::size_t>(i) * K, static_cast<std::size_t>(K)});
        }
        std::vector<std::unique_ptr<TreeNode>> round_trees;
        round_trees.reserve(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            for (int i = 0; i < n; ++i) {
                const double onehot =
                    train.y[static_cast<std::size_t>(i)] - 1 == k ? 1.0 : 0.0;
                residuals[static_cast<std::size_t>(i)] =
                    onehot - probs[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            }
            auto tree = fit_regression_tree(train, residuals, params.max_depth,
                                            params.min_samples_split, params.min_samples_leaf);
            for (int i = 0; i < n; ++i) {
                scores[static_cast<std::size_t>(i) * K + static_cast<std::size_t>(k)] +=
                    params.learning_rate * tree->descend(train.row(i)).value;
            }
            round_trees.push_back(std::move(tree));
        }
        model.stages_.push_back(std::move(round_trees));
    }
    return model;
}

std::vector<double> GbmModel::decision_scores(std::span<const double> row, int n_stages) const {
    std::vector<double> scores(initial_scores_.begin(), initial_scores_.end());
    const auto limit = n_stages < 0 ? stages_.size()
                                    : std::min(stages_.size(), static_cast<std::size_t>(n_stages));
    for (std::size_t m = 0; m < limit; ++m) {
        for (int k = 0; k < n_classes_; ++k) {
            scores[static_cast<std::size_t>(k)] +=
                params_.learning_rate * stages_[m][static_cast<std::size_t>(k)]->descend(row).value;
        }
    }
    return scores;
}

ClassDistribution GbmModel::predict_proba(std::span<const double> row) const {
    check_width(row);
    return ClassDistribution{softmax(decision_scores(row))};
}

double multinomial_deviance(const std::vector<ClassDistribution>& probs,
                            std::span<const int> labels) {
    if (probs.size() != labels.size()) throw DataError("multinomial_deviance: length mismatch");
    double total = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const auto k = static_cast<std::size_t>(labels[i] - 1);
        total += -std::log(std::max(probs[i].probs[k], 1e-15));
    }
    return total / static_cast<double>(probs.size());
}

} // namespace xmc
