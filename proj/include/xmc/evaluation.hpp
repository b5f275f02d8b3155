#pragma once

#include "xmc/classifier.hpp"
#include "xmc/dataset.hpp"
#include "xmc/lime.hpp"
#include "xmc/model_io.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace xmc {

// Micro-averaged metrics; in single-label multiclass these all equal
// accuracy, which the implementation preserves exactly.
struct Metrics {
    double accuracy = 0.0;
    double micro_precision = 0.0;
    double micro_recall = 0.0;
    double micro_f1 = 0.0;
    double train_time_seconds = 0.0; // reported only, never asserted
    std::vector<std::vector<long long>> confusion; // [true][predicted]
};

Metrics micro_metrics(std::span<const int> predictions, std::span<const int> labels,
                      int n_classes);

struct CvResult {
    std::vector<double> fold_accuracy;
    double mean = 0.0;
    double stddev = 0.0;
};

// Stratified fold ids per row (values 0..folds-1); per-class sizes differ by
// at most one. Throws DataError when a class has fewer rows than folds.
std::vector<int> stratified_fold_ids(const Dataset& ds, int folds, std::uint64_t seed);

CvResult cross_validate(const std::string& model_kind, const ojson& params, const Dataset& ds,
                        int folds, std::uint64_t seed, int n_threads = 0);

struct GridSearchResult {
    ojson best_params;
    CvResult best_result;
    std::vector<std::pair<ojson, double>> evaluated; // (params, cv mean) in grid order
};

// Exhaustive Cartesian product by CV mean accuracy; ties keep the first
// point in grid order. An empty grid uses the kind's default grid.
GridSearchResult grid_search(const std::string& model_kind, const ojson& grid, const Dataset& ds,
                             int folds, std::uint64_t seed, int n_threads = 0);

ojson default_grid(const std::string& model_kind);

// Per-true-class LIME prediction accuracy (the surrogate predicts the
// black box's label, so this equals per-class model accuracy).
struct PerClassLimeAccuracy {
    std::vector<long long> correct;
    std::vector<long long> incorrect;
    std::vector<double> accuracy;
    long long total_correct = 0;
    long long total_incorrect = 0;
    double total_accuracy = 0.0;
};

PerClassLimeAccuracy lime_accuracy_table(const Classifier& model, const Dataset& test_set,
                                         const LimeConfig& config, const TrainStats& stats,
                                         int n_threads = 0);

// Same table from precomputed explanations (true_label must be set).
PerClassLimeAccuracy lime_accuracy_from(std::span<const LimeExplanation> explanations,
                                        int n_classes);

// Mean over instances of the model's top-class probability.
double avg_top1_probability(const Classifier& model, const Dataset& test_set);

ojson metrics_to_json(const Metrics& m, bool include_timing = true);
ojson cv_to_json(const CvResult& cv);
ojson lime_table_to_json(const PerClassLimeAccuracy& t);

} // namespace xmc
