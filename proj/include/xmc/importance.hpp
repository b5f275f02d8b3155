#pragma once

#include "xmc/dataset.hpp"
#include "xmc/lime.hpp"
#include "xmc/model_io.hpp"
#include "xmc/tree.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace xmc {

// Normalized per-feature importance. Scores sum to 1 whenever any split
// exists; a model with no splits reports all zeros with undefined_total set.
struct ImportanceReport {
    std::vector<std::string> feature_names;
    std::vector<double> scores;
    std::vector<int> ranking; // score descending, ties by feature index
    std::string source;       // "gini" | "lime-aggregate"
    bool undefined_total = false;
};

// Weighted impurity decrease of an internal node:
// w_j C_j - w_left C_left - w_right C_right, w = fraction of training rows.
double node_importance(const TreeNode& node);

ImportanceReport tree_feature_importance(const DecisionTreeModel& tree,
                                         const std::vector<std::string>& feature_names);

// Per-tree normalized importances averaged over the ensemble, renormalized.
// The GBM variant runs over every regression stage (variance impurity).
ImportanceReport ensemble_importance(const ForestModel& forest,
                                     const std::vector<std::string>& feature_names);
ImportanceReport ensemble_importance(const GbmModel& gbm,
                                     const std::vector<std::string>& feature_names);

// Dispatch for tree-based classifiers; throws UsageError otherwise.
ImportanceReport model_importance(const Classifier& model,
                                  const std::vector<std::string>& feature_names);

// Tables in the shape of the per-class top-5 reports: summed |surrogate
// weight| per feature, overall and grouped by true label.
struct LimeAggregate {
    ImportanceReport overall;
    std::vector<std::vector<double>> per_class_sums; // [class][feature], raw |w| sums
    std::vector<std::vector<int>> top_per_class;     // up to `top_k` feature indices
    std::vector<int> instances_per_class;
    int top_k = 5;
};

LimeAggregate aggregate_lime_importance(std::span<const LimeExplanation> explanations,
                                        const std::vector<std::string>& feature_names,
                                        int n_classes, int top_k = 5);

struct RetrainResult {
    double accuracy_full = 0.0;
    double accuracy_topk = 0.0;
    std::vector<std::string> selected_features;
};

// Trains the model on the full feature set and on the restricted set under
// an identical split/seed protocol and reports both test accuracies.
RetrainResult topk_retrain(const Dataset& dataset, const std::string& model_kind,
                           const ojson& params, const std::vector<std::string>& selected_features,
                           std::uint64_t seed, double train_fraction = 0.8, int n_threads = 0);

ojson importance_to_json(const ImportanceReport& report);
ojson lime_aggregate_to_json(const LimeAggregate& agg);

} // namespace xmc
