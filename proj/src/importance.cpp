#include "xmc/importance.hpp"

#include "xmc/errors.hpp"
#include "xmc/rng.hpp"
#include "xmc/survey.hpp"

#include <algorithm>
#include <cmath>

namespace xmc {

namespace {

std::vector<int> ranked_order(const std::vector<double>& scores) {
    std::vector<int> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = scores[static_cast<std::size_t>(a)];
        const double sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    return order;
}

void accumulate_node_importance(const TreeNode& node, std::vector<double>& per_feature) {
    if (node.is_leaf()) return;
    per_feature[static_cast<std::size_t>(node.feature)] += node_importance(node);
    accumulate_node_importance(*node.left, per_feature);
    accumulate_node_importance(*node.right, per_feature);
}

// Per-feature importances of one tree, normalized to sum 1; false when the
// tree has no splits.
bool normalized_tree_scores(const TreeNode& root, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    accumulate_node_importance(root, out);
    double total = 0;
    for (double v : out) total += v;
    if (total <= 0) return false;
    for (auto& v : out) v /= total;
    return true;
}

ImportanceReport finish_report(std::vector<double> scores,
                               const std::vector<std::string>& feature_names, std::string source,
                               bool undefined_total) {
    ImportanceReport report;
    report.feature_names = feature_names;
    report.scores = std::move(scores);
    report.ranking = ranked_order(report.scores);
    report.source = std::move(source);
    report.undefined_total = undefined_total;
    return report;
}

} // namespace

double node_importance(const TreeNode& node) {
    if (node.is_leaf()) throw NumericError("node_importance: leaf node");
    return node.weighted_n * node.impurity - node.left->weighted_n * node.left->impurity -
           node.right->weighted_n * node.right->impurity;
}

ImportanceReport tree_feature_importance(const DecisionTreeModel& tree,
                                         const std::vector<std::string>& feature_names) {
    std::vector<double> scores(static_cast<std::size_t>(tree.n_features()), 0.0);
    const bool defined = normalized_tree_scores(tree.root(), scores);
    if (!defined) std::fill(scores.begin(), scores.end(), 0.0);
    return finish_report(std::move(scores), feature_names, "gini", !defined);
}

ImportanceReport ensemble_importance(const ForestModel& forest,
                                     const std::vector<std::string>& feature_names) {
    std::vector<double> total(static_cast<std::size_t>(forest.n_features()), 0.0);
    std::vector<double> scratch(total.size());
    int defined_trees = 0;
    for (const auto& tree : forest.trees()) {
        if (!normalized_tree_scores(tree.root(), scratch)) continue;
        ++defined_trees;
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += scratch[i];
    }
    if (defined_trees == 0) {
        return finish_report(std::move(total), feature_names, "gini", true);
    }
    // Normalize-then-average; renormalizing the sum gives the same scores.
    for (auto& v : total) v /= defined_trees;
    return finish_report(std::move(total), feature_names, "gini", false);
}

ImportanceReport ensemble_importance(const GbmModel& gbm,
                                     const std::vector<std::string>& feature_names) {
    std::vector<double> total(static_cast<std::size_t>(gbm.n_features()), 0.0);
    std::vector<double> scratch(total.size());
    int defined_trees = 0;
    for (const auto& round : gbm.stages()) {
        for (const auto& tree : round) {
            if (!normalized_tree_scores(*tree, scratch)) continue;
            ++defined_trees;
            for (std::size_t i = 0; i < total.size(); ++i) total[i] += scratch[i];
        }
    }
    if (defined_trees == 0) {
        return finish_report(std::move(total), feature_names, "gini", true);
    }
    for (auto& v : total) v /= defined_trees;
    return finish_report(std::move(total), feature_names, "gini", false);
}

ImportanceReport model_importance(const Classifier& model,
                                  const std::vector<std::string>& feature_names) {
    if (const auto* dt = dynamic_cast<const DecisionTreeModel*>(&model)) {
        return tree_feature_importance(*dt, feature_names);
    }
    if (const auto* rf = dynamic_cast<const ForestModel*>(&model)) {
        return ensemble_importance(*rf, feature_names);
    }
    if (const auto* gb = dynamic_cast<const GbmModel*>(&model)) {
        return ensemble_importance(*gb, feature_names);
    }
    throw UsageError("impurity importance requires a tree-based model (dt, rf, gb)");
}

LimeAggregate aggregate_lime_importance(std::span<const LimeExplanation> explanations,
                                        const std::vector<std::string>& feature_names,
                                        int n_classes, int top_k) {
    if (explanations.empty()) throw DataError("aggregate_lime_importance: no explanations");
    const auto d = feature_names.size();
    LimeAggregate agg;
    agg.top_k = top_k;
    agg.per_class_sums.assign(static_cast<std::size_t>(n_classes),
                              std::vector<double>(d, 0.0));
    agg.instances_per_class.assign(static_cast<std::size_t>(n_classes), 0);

    std::vector<double> overall(d, 0.0);
    for (const auto& expl : explanations) {
        if (expl.surrogate.weights.size() != d) {
            throw DataError("aggregate_lime_importance: explanation width mismatch");
        }
        for (std::size_t f = 0; f < d; ++f) {
            const double w = std::fabs(expl.surrogate.weights[f]);
            overall[f] += w;
            if (expl.true_label >= 1 && expl.true_label <= n_classes) {
                agg.per_class_sums[static_cast<std::size_t>(expl.true_label - 1)][f] += w;
            }
        }
        if (expl.true_label >= 1 && expl.true_label <= n_classes) {
            ++agg.instances_per_class[static_cast<std::size_t>(expl.true_label - 1)];
        }
    }
    double total = 0;
    for (double v : overall) total += v;
    const bool undefined = total <= 0;
    if (!undefined) {
        for (auto& v : overall) v /= total;
    }
    agg.overall = finish_report(std::move(overall), feature_names, "lime-aggregate", undefined);

    for (int k = 0; k < n_classes; ++k) {
        const auto& sums = agg.per_class_sums[static_cast<std::size_t>(k)];
        std::vector<int> row;
        if (agg.instances_per_class[static_cast<std::size_t>(k)] > 0) {
            const auto order = ranked_order(sums);
            const auto take = std::min<std::size_t>(static_cast<std::size_t>(top_k), order.size());
            row.assign(order.begin(), order.begin() + take);
        }
        agg.top_per_class.push_back(std::move(row));
    }
    return agg;
}

RetrainResult topk_retrain(const Dataset& dataset, const std::string& model_kind,
                           const ojson& params, const std::vector<std::string>& selected_features,
                           std::uint64_t seed, double train_fraction, int n_threads) {
    if (selected_features.empty()) throw DataError("topk_retrain: no features selected");
    std::vector<int> cols;
    cols.reserve(selected_features.size());
    for (const auto& name : selected_features) {
        const int idx = dataset.schema.index_of(name);
        if (idx < 0) throw DataError("topk_retrain: unknown feature '" + name + "'");
        cols.push_back(idx);
    }
    // Canonical schema order, so the identity subset reproduces the full fit.
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    // Split and train on the same seed streams as the full pipeline, so the
    // full-feature accuracy here matches the pipeline's holdout metrics.
    const auto [train, test] =
        stratified_split(dataset, train_fraction, derive_seed(seed, seed_stream::split));
    const auto accuracy_of = [&](const Dataset& tr, const Dataset& te) {
        const auto bundle = train_model(model_kind, params, tr,
                                        derive_seed(seed, seed_stream::train), n_threads);
        const auto preds = bundle.model->predict_all(te);
        int correct = 0;
        for (int i = 0; i < te.n_rows(); ++i) {
            correct += preds[static_cast<std::size_t>(i)] == te.y[static_cast<std::size_t>(i)];
        }
        return static_cast<double>(correct) / te.n_rows();
    };

    RetrainResult result;
    result.accuracy_full = accuracy_of(train, test);
    result.accuracy_topk = accuracy_of(train.select_columns(cols), test.select_columns(cols));
    for (int c : cols) result.selected_features.push_back(dataset.schema.at(c).name);
    return result;
}

ojson importance_to_json(const ImportanceReport& report) {
    ojson j;
    j["source"] = report.source;
    j["undefined_total"] = report.undefined_total;
    ojson scores = ojson::object();
    for (std::size_t i = 0; i < report.feature_names.size(); ++i) {
        scores[report.feature_names[i]] = report.scores[i];
    }
    j["scores"] = std::move(scores);
    ojson ranking = ojson::array();
    for (int idx : report.ranking) {
        ranking.push_back(report.feature_names[static_cast<std::size_t>(idx)]);
    }
    j["ranking"] = std::move(ranking);
    return j;
}

ojson lime_aggregate_to_json(const LimeAggregate& agg) {
    ojson j;
    j["overall"] = importance_to_json(agg.overall);
    ojson per_class = ojson::array();
    for (std::size_t k = 0; k < agg.per_class_sums.size(); ++k) {
        ojson entry;
        entry["label"] = k + 1;
        entry["instances"] = agg.instances_per_class[k];
        ojson top = ojson::array();
        for (int f : agg.top_per_class[k]) {
            ojson t;
            t["feature"] = agg.overall.feature_names[static_cast<std::size_t>(f)];
            t["abs_weight_sum"] = agg.per_class_sums[k][static_cast<std::size_t>(f)];
            top.push_back(std::move(t));
        }
        entry["top_features"] = std::move(top);
        per_class.push_back(std::move(entry));
    }
    j["per_class"] = std::move(per_class);
    return j;
}

} // namespace xmc
