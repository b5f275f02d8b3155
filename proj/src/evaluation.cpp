#include "xmc/evaluation.hpp"

#include "xmc/errors.hpp"
#include "xmc/parallel.hpp"
#include "xmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xmc {

Metrics micro_metrics(std::span<const int> predictions, std::span<const int> labels,
                      int n_classes) {
    if (predictions.size() != labels.size() || labels.empty()) {
        throw DataError("micro_metrics: prediction/label length mismatch or empty");
    }
    Metrics m;
    m.confusion.assign(static_cast<std::size_t>(n_classes),
                       std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
    long long tp = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int t = labels[i], p = predictions[i];
        if (t < 1 || t > n_classes || p < 1 || p > n_classes) {
            throw DataError("micro_metrics: label outside [1, n_classes]");
        }
        ++m.confusion[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(p - 1)];
        tp += t == p;
    }
    const auto n = static_cast<long long>(labels.size());
    // Pooled over classes: FP = FN = n - TP, so precision and recall reduce
    // to the same division as accuracy.
    m.accuracy = static_cast<double>(tp) / static_cast<double>(n);
    m.micro_precision = static_cast<double>(tp) / static_cast<double>(tp + (n - tp));
    m.micro_recall = static_cast<double>(tp) / static_cast<double>(tp + (n - tp));
    m.micro_f1 = m.micro_precision == m.micro_recall
                     ? m.micro_precision
                     : 2.0 * m.micro_precision * m.micro_recall /
                           (m.micro_precision + m.micro_recall);
    return m;
}

std::vector<int> stratified_fold_ids(const Dataset& ds, int folds, std::uint64_t seed) {
    if (folds < 2) throw DataError("cross-validation needs folds >= 2");
    const auto counts = ds.class_counts();
    for (int k = 0; k < ds.n_classes; ++k) {
        if (counts[static_cast<std::size_t>(k)] < folds) {
            throw DataError("class " + std::to_string(k + 1) + " has " +
                            std::to_string(counts[static_cast<std::size_t>(k)]) +
                            " rows, fewer than " + std::to_string(folds) + " folds");
        }
    }
    std::vector<int> fold_ids(static_cast<std::size_t>(ds.n_rows()), -1);
    for (int k = 0; k < ds.n_classes; ++k) {
        std::vector<int> rows;
        for (int r = 0; r < ds.n_rows(); ++r) {
            if (ds.y[static_cast<std::size_t>(r)] == k + 1) rows.push_back(r);
        }
        Rng rng(derive_seed(seed, 0xF01Du + static_cast<std::uint64_t>(k)));
        rng.shuffle(rows);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            fold_ids[static_cast<std::size_t>(rows[i])] = static_cast<int>(i % folds);
        }
    }
    return fold_ids;
}

CvResult cross_validate(const std::string& model_kind, const ojson& params, const Dataset& ds,
                        int folds, std::uint64_t seed, int n_threads) {
    const auto fold_ids = stratified_fold_ids(ds, folds, seed);
    CvResult result;
    result.fold_accuracy.resize(static_cast<std::size_t>(folds));
    for (int fold = 0; fold < folds; ++fold) {
        std::vector<int> train_rows, test_rows;
        for (int r = 0; r < ds.n_rows(); ++r) {
            if (fold_ids[static_cast<std::size_t>(r)] == fold) test_rows.push_back(r);
            else train_rows.push_back(r);
        }
        const Dataset train = ds.select_rows(train_rows);
        const Dataset test = ds.select_rows(test_rows);
        const auto bundle = train_model(model_kind, params, train,
                                        derive_seed(seed, static_cast<std::uint64_t>(fold)),
                                        n_threads);
        const auto preds = bundle.model->predict_all(test);
        int correct = 0;
        for (int i = 0; i < test.n_rows(); ++i) {
            correct += preds[static_cast<std::size_t>(i)] == test.y[static_cast<std::size_t>(i)];
        }
        result.fold_accuracy[static_cast<std::size_t>(fold)] =
            static_cast<double>(correct) / test.n_rows();
    }
    double total = 0;
    for (double a : result.fold_accuracy) total += a;
    result.mean = total / folds;
    double sq = 0;
    for (double a : result.fold_accuracy) sq += (a - result.mean) * (a - result.mean);
    result.stddev = std::sqrt(sq / folds);
    return result;
}

ojson default_grid(const std::string& model_kind) {
    ojson g;
    if (model_kind == "gb") {
        g["learning_rate"] = {0.05, 0.1, 0.2};
        g["max_depth"] = {1, 3, 5};
        g["n_estimators"] = {50, 150, 300};
    } else if (model_kind == "rf") {
        g["max_depth"] = {4, 6, 10};
        g["n_estimators"] = {100, 500};
        g["min_samples_split"] = {2, 4};
    } else if (model_kind == "dt") {
        g["max_depth"] = {10, 20, -1};
        g["min_samples_leaf"] = {1, 3};
        g["min_samples_split"] = {2, 3};
    } else {
        throw UsageError("no default grid for model kind '" + model_kind + "'");
    }
    return g;
}

GridSearchResult grid_search(const std::string& model_kind, const ojson& grid, const Dataset& ds,
                             int folds, std::uint64_t seed, int n_threads) {
    const ojson g = grid.is_null() || grid.empty() ? default_grid(model_kind) : grid;
    if (!g.is_object()) throw UsageError("grid must be a JSON object of parameter lists");
    std::vector<std::string> keys;
    std::vector<std::vector<ojson>> values;
    for (const auto& [key, list] : g.items()) {
        if (!list.is_array() || list.empty()) {
            throw UsageError("grid entry '" + key + "' must be a nonempty array");
        }
        keys.push_back(key);
        values.emplace_back(list.begin(), list.end());
    }
    if (keys.empty()) throw UsageError("grid is empty");

    GridSearchResult result;
    std::vector<std::size_t> odo(keys.size(), 0);
    bool done = false;
    while (!done) {
        ojson point = ojson::object();
        for (std::size_t i = 0; i < keys.size(); ++i) point[keys[i]] = values[i][odo[i]];
        const CvResult cv = cross_validate(model_kind, point, ds, folds, seed, n_threads);
        result.evaluated.emplace_back(point, cv.mean);
        if (result.best_params.is_null() || cv.mean > result.best_result.mean) {
            result.best_params = point;
            result.best_result = cv;
        }
        // Odometer, last key fastest.
        done = true;
        for (std::size_t i = keys.size(); i-- > 0;) {
            if (++odo[i] < values[i].size()) {
                done = false;
                break;
            }
            odo[i] = 0;
        }
    }
    return result;
}

PerClassLimeAccuracy lime_accuracy_from(std::span<const LimeExplanation> explanations,
                                        int n_classes) {
    PerClassLimeAccuracy table;
    table.correct.assign(static_cast<std::size_t>(n_classes), 0);
    table.incorrect.assign(static_cast<std::size_t>(n_classes), 0);
    table.accuracy.assign(static_cast<std::size_t>(n_classes), 0.0);
    for (const auto& expl : explanations) {
        if (expl.true_label < 1 || expl.true_label > n_classes) {
            throw DataError("lime accuracy table: explanation lacks a true label");
        }
        const auto k = static_cast<std::size_t>(expl.true_label - 1);
        if (expl.predicted_label == expl.true_label) ++table.correct[k];
        else ++table.incorrect[k];
    }
    for (int k = 0; k < n_classes; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const long long total = table.correct[ku] + table.incorrect[ku];
        table.accuracy[ku] = total > 0 ? static_cast<double>(table.correct[ku]) / total : 0.0;
        table.total_correct += table.correct[ku];
        table.total_incorrect += table.incorrect[ku];
    }
    const long long total = table.total_correct + table.total_incorrect;
    table.total_accuracy = total > 0 ? static_cast<double>(table.total_correct) / total : 0.0;
    return table;
}

PerClassLimeAccuracy lime_accuracy_table(const Classifier& model, const Dataset& test_set,
                                         const LimeConfig& config, const TrainStats& stats,
                                         int n_threads) {
    if (test_set.n_rows() == 0) throw DataError("lime_accuracy_table: empty test set");
    std::vector<LimeExplanation> explanations(static_cast<std::size_t>(test_set.n_rows()));
    parallel_for(
        test_set.n_rows(),
        [&](int r) {
            LimeConfig local = config;
            local.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
            auto expl = explain_instance(model, test_set.row(r), local, stats);
            expl.true_label = test_set.y[static_cast<std::size_t>(r)];
            explanations[static_cast<std::size_t>(r)] = std::move(expl);
        },
        n_threads);
    return lime_accuracy_from(explanations, test_set.n_classes);
}

double avg_top1_probability(const Classifier& model, const Dataset& test_set) {
    if (test_set.n_rows() == 0) throw DataError("avg_top1_probability: empty test set");
    double total = 0;
    for (int r = 0; r < test_set.n_rows(); ++r) {
        total += model.predict_proba(test_set.row(r)).max_prob();
    }
    return total / test_set.n_rows();
}

ojson metrics_to_json(const Metrics& m, bool include_timing) {
    ojson j;
    j["accuracy"] = m.accuracy;
    j["micro_precision"] = m.micro_precision;
    j["micro_recall"] = m.micro_recall;
    j["micro_f1"] = m.micro_f1;
    if (include_timing) j["train_time_seconds"] = m.train_time_seconds;
    j["confusion"] = m.confusion;
    return j;
}

ojson cv_to_json(const CvResult& cv) {
    ojson j;
    j["fold_accuracy"] = cv.fold_accuracy;
    j["mean"] = cv.mean;
    j["stddev"] = cv.stddev;
    return j;
}

ojson lime_table_to_json(const PerClassLimeAccuracy& t) {
    ojson j;
    ojson rows = ojson::array();
    for (std::size_t k = 0; k < t.correct.size(); ++k) {
        ojson row;
        row["label"] = k + 1;
        row["correct"] = t.correct[k];
        row["incorrect"] = t.incorrect[k];
        row["accuracy"] = t.accuracy[k];
        rows.push_back(std::move(row));
    }
    j["per_class"] = std::move(rows);
    j["total_correct"] = t.total_correct;
    j["total_incorrect"] = t.total_incorrect;
    j["total_accuracy"] = t.total_accuracy;
    return j;
}

} // namespace xmc
