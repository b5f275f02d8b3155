#include "xmc/pipeline.hpp"

#include "xmc/csv.hpp"
#include "xmc/errors.hpp"
#include "xmc/evaluation.hpp"
#include "xmc/factsheet.hpp"
#include "xmc/importance.hpp"
#include "xmc/parallel.hpp"
#include "xmc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace xmc {

namespace fs = std::filesystem;

IngestResult ingest_waves(const std::vector<std::string>& wave_paths) {
    if (wave_paths.empty()) throw DataError("ingest: no wave files given");
    std::vector<RawSurveyTable> tables;
    tables.reserve(wave_paths.size());
    for (std::size_t i = 0; i < wave_paths.size(); ++i) {
        tables.push_back(load_wave_csv(wave_paths[i], static_cast<int>(i) + 1));
    }
    IngestResult result;
    result.missingness = missingness_report(tables);
    tables = drop_inconsistent(harmonize_q4(std::move(tables)));
    auto [imputed, stats] = impute_mean(concatenate_and_label(tables));
    result.dataset = std::move(imputed);
    result.imputation = std::move(stats);
    return result;
}

RunConfig RunConfig::from_json(const ojson& j) {
    RunConfig c;
    if (j.is_null()) return c;
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("data")) {
        const auto& d = j.at("data");
        c.wave_paths = d.value("waves", c.wave_paths);
        c.synth.rows_per_wave = d.value("rows_per_wave", c.synth.rows_per_wave);
        c.synth.n_planted = d.value("n_planted", c.synth.n_planted);
        c.synth.drift_strength = d.value("drift_strength", c.synth.drift_strength);
    }
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.models = j.value("models", c.models);
    if (j.contains("params")) c.model_params = j.at("params");
    c.tune = j.value("tune", c.tune);
    c.tune_folds = j.value("tune_folds", c.tune_folds);
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    if (j.contains("lime")) {
        const auto& l = j.at("lime");
        c.lime.num_samples = l.value("num_samples", c.lime.num_samples);
        c.lime.kernel_width = l.value("kernel_width", c.lime.kernel_width);
        c.lime.ridge_lambda = l.value("ridge_lambda", c.lime.ridge_lambda);
        c.lime.num_features_k = l.value("num_features_k", c.lime.num_features_k);
    }
    c.max_explanations = j.value("max_explanations", c.max_explanations);
    c.topk_lime = j.value("topk_lime", c.topk_lime);
    c.topk_gini = j.value("topk_gini", c.topk_gini);
    c.n_threads = j.value("threads", c.n_threads);
    c.record_timings = j.value("record_timings", c.record_timings);
    return c;
}

ojson RunConfig::to_json() const {
    // out_dir is deliberately not echoed: the file already lives there, and
    // artifacts must be byte-identical across output locations.
    ojson j;
    j["seed"] = seed;
    ojson d;
    if (!wave_paths.empty()) d["waves"] = wave_paths;
    d["rows_per_wave"] = synth.rows_per_wave;
    d["n_planted"] = synth.n_planted;
    d["drift_strength"] = synth.drift_strength;
    j["data"] = std::move(d);
    j["train_fraction"] = train_fraction;
    j["models"] = models;
    j["params"] = model_params;
    j["tune"] = tune;
    j["tune_folds"] = tune_folds;
    j["cv_folds"] = cv_folds;
    ojson l;
    l["num_samples"] = lime.num_samples;
    l["kernel_width"] = lime.kernel_width;
    l["ridge_lambda"] = lime.ridge_lambda;
    l["num_features_k"] = lime.num_features_k;
    j["lime"] = std::move(l);
    j["max_explanations"] = max_explanations;
    j["topk_lime"] = topk_lime;
    j["topk_gini"] = topk_gini;
    // threads is an execution detail: artifacts are identical at any count.
    j["record_timings"] = record_timings;
    return j;
}

ojson explanation_to_json(const LimeExplanation& expl,
                          const std::vector<std::string>& feature_names, int row_index) {
    ojson j;
    j["row_index"] = row_index;
    j["true_label"] = expl.true_label;
    j["predicted_label"] = expl.predicted_label;
    j["top1_probability"] = expl.top1_probability;
    j["local_r2"] = expl.local_r2;
    j["target_class"] = expl.surrogate.target_class;
    j["intercept"] = expl.surrogate.intercept;
    ojson top = ojson::array();
    for (const auto& [f, w] : expl.top_features) {
        ojson t;
        t["feature"] = feature_names[static_cast<std::size_t>(f)];
        t["weight"] = w;
        top.push_back(std::move(t));
    }
    j["top_features"] = std::move(top);
    j["feature_names"] = feature_names;
    j["weights"] = expl.surrogate.weights;
    return j;
}

LimeExplanation explanation_from_json(const ojson& j, std::vector<std::string>* feature_names,
                                      int* row_index) {
    LimeExplanation expl;
    expl.true_label = j.at("true_label").get<int>();
    expl.predicted_label = j.at("predicted_label").get<int>();
    expl.top1_probability = j.at("top1_probability").get<double>();
    expl.local_r2 = j.at("local_r2").get<double>();
    expl.surrogate.target_class = j.at("target_class").get<int>();
    expl.surrogate.intercept = j.at("intercept").get<double>();
    expl.surrogate.weights = j.at("weights").get<std::vector<double>>();
    const auto names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& t : j.at("top_features")) {
        const auto name = t.at("feature").get<std::string>();
        const auto it = std::find(names.begin(), names.end(), name);
        expl.top_features.emplace_back(static_cast<int>(it - names.begin()),
                                       t.at("weight").get<double>());
    }
    if (feature_names) *feature_names = names;
    if (row_index) *row_index = j.value("row_index", -1);
    return expl;
}

ojson imputation_to_json(const ImputationStats& stats) {
    ojson j = ojson::object();
    for (std::size_t i = 0; i < stats.feature_names.size(); ++i) {
        ojson e;
        e["mean"] = stats.mean[i];
        e["missing_count"] = stats.missing_count[i];
        j[stats.feature_names[i]] = std::move(e);
    }
    return j;
}

ojson missingness_to_json(const std::vector<std::pair<std::string, std::size_t>>& report) {
    ojson j = ojson::object();
    for (const auto& [name, count] : report) j[name] = count;
    return j;
}

namespace {

struct StageTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string row_file_name(int row) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "row_%05d.json", row);
    return buf;
}

// Plot-ready series: rank,feature,score rows in ranking order.
void write_importance_csv(const ImportanceReport& report, const std::string& path) {
    CsvTable table;
    table.header = {"rank", "feature", "score"};
    for (std::size_t i = 0; i < report.ranking.size(); ++i) {
        const auto f = static_cast<std::size_t>(report.ranking[i]);
        table.rows.push_back({std::to_string(i + 1), report.feature_names[f],
                              format_number(report.scores[f])});
    }
    write_csv(table, path);
}

void write_cv_csv(const CvResult& cv, const std::string& path) {
    CsvTable table;
    table.header = {"fold", "accuracy"};
    for (std::size_t i = 0; i < cv.fold_accuracy.size(); ++i) {
        table.rows.push_back({std::to_string(i + 1), format_number(cv.fold_accuracy[i])});
    }
    write_csv(table, path);
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
    return buf;
}

// Rows to explain: everything when the cap allows, otherwise an even stride
// across the test set (its rows are grouped by class).
std::vector<int> explained_rows(int n_rows, int cap) {
    const int count = cap > 0 ? std::min(cap, n_rows) : n_rows;
    std::vector<int> rows;
    rows.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        rows.push_back(static_cast<int>(static_cast<long long>(i) * n_rows / count));
    }
    return rows;
}

// Per-row seeds derive from the explain stream and the actual row index, so
// a row's explanation does not depend on the cap; true labels attached.
std::vector<LimeExplanation> explain_rows(const Classifier& model, const Dataset& test,
                                          const std::vector<int>& rows, const LimeConfig& lime,
                                          std::uint64_t root_seed, int n_threads,
                                          const TrainStats& stats) {
    std::vector<LimeExplanation> out(rows.size());
    const std::uint64_t base = derive_seed(root_seed, seed_stream::explain);
    parallel_for(
        static_cast<int>(rows.size()),
        [&](int i) {
            const int r = rows[static_cast<std::size_t>(i)];
            LimeConfig local = lime;
            local.seed = derive_seed(base, static_cast<std::uint64_t>(r));
            auto expl = explain_instance(model, test.row(r), local, stats);
            expl.true_label = test.y[static_cast<std::size_t>(r)];
            out[static_cast<std::size_t>(i)] = std::move(expl);
        },
        n_threads);
    return out;
}

} // namespace

void run_full_pipeline(const RunConfig& config) {
    const fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir);
    auto path = [&out_dir](const std::string& name) { return (out_dir / name).string(); };

    write_json_file(config.to_json(), path("run_config.json"));

    // --- data ---------------------------------------------------------
    std::cout << "[data] ";
    Dataset dataset;
    if (!config.wave_paths.empty()) {
        std::cout << "ingesting " << config.wave_paths.size() << " wave files" << std::endl;
        IngestResult ingest = ingest_waves(config.wave_paths);
        dataset = std::move(ingest.dataset);
        write_json_file(missingness_to_json(ingest.missingness), path("missingness.json"));
        write_json_file(imputation_to_json(ingest.imputation), path("imputation.json"));
    } else {
        SynthConfig synth = config.synth;
        synth.seed = config.seed;
        std::cout << "synthetic data, " << synth.rows_per_wave << " rows/wave, drift "
                  << synth.drift_strength << std::endl;
        dataset = synth_generate(synth);
    }
    write_dataset_csv(dataset, path("data.csv"));

    const auto [train, test] =
        stratified_split(dataset, config.train_fraction, derive_seed(config.seed, seed_stream::split));
    write_dataset_csv(train, path("train.csv"));
    write_dataset_csv(test, path("test.csv"));
    std::cout << "[split] " << train.n_rows() << " train / " << test.n_rows() << " test"
              << std::endl;

    const TrainStats stats = TrainStats::from(train);
    const auto feature_names = dataset.schema.names();

    struct KindSummary {
        std::string kind;
        ojson params;
        Metrics metrics;
        PerClassLimeAccuracy lime_table;
        int rows_explained = 0;
        double mean_r2 = 0.0;
        double top1 = 0.0;
        std::vector<std::string> lime_top;
        std::vector<std::string> gini_top;
        RetrainResult retrain_lime;
        bool has_gini = false;
        RetrainResult retrain_gini;
        LimeAggregate aggregate;
    };
    std::vector<KindSummary> summaries;

    for (const auto& kind : config.models) {
        if (!known_model_kind(kind)) throw UsageError("unknown model kind '" + kind + "'");
        KindSummary s;
        s.kind = kind;
        ojson params = config.model_params.contains(kind) ? config.model_params.at(kind)
                                                          : ojson(nullptr);

        if (config.tune) {
            StageTimer t;
            const auto tuned = grid_search(kind, ojson(nullptr), train, config.tune_folds,
                                           derive_seed(config.seed, seed_stream::tune),
                                           config.n_threads);
            ojson tj;
            tj["best_params"] = tuned.best_params;
            tj["best_cv"] = cv_to_json(tuned.best_result);
            ojson evaluated = ojson::array();
            for (const auto& [point, mean] : tuned.evaluated) {
                ojson e;
                e["params"] = point;
                e["cv_mean"] = mean;
                evaluated.push_back(std::move(e));
            }
            tj["evaluated"] = std::move(evaluated);
            write_json_file(tj, path("tune_" + kind + ".json"));
            std::cout << "[tune " << kind << "] best cv " << pct(tuned.best_result.mean) << " in "
                      << t.seconds() << "s" << std::endl;
            if (params.is_null()) params = ojson::object();
            for (const auto& [k, v] : tuned.best_params.items()) params[k] = v;
        }

        StageTimer fit_timer;
        ModelBundle bundle = train_model(kind, params, train,
                                         derive_seed(config.seed, seed_stream::train),
                                         config.n_threads);
        const double fit_seconds = fit_timer.seconds();
        s.params = bundle.params;
        save_model(bundle, path("model_" + kind + ".json"));

        const auto preds = bundle.model->predict_all(test);
        s.metrics = micro_metrics(preds, test.y, test.n_classes);
        s.metrics.train_time_seconds = fit_seconds;
        write_json_file(metrics_to_json(s.metrics, config.record_timings),
                        path("metrics_" + kind + ".json"));
        std::cout << "[train " << kind << "] " << fit_seconds << "s, test accuracy "
                  << pct(s.metrics.accuracy) << std::endl;

        if (config.cv_folds >= 2) {
            StageTimer t;
            const auto cv = cross_validate(kind, params, dataset, config.cv_folds,
                                           derive_seed(config.seed, seed_stream::cv),
                                           config.n_threads);
            write_json_file(cv_to_json(cv), path("cv_" + kind + ".json"));
            write_cv_csv(cv, path("cv_" + kind + ".csv"));
            std::cout << "[cv " << kind << "] mean " << pct(cv.mean) << " in " << t.seconds()
                      << "s" << std::endl;
        }

        // --- explanations ---------------------------------------------
        const auto rows = explained_rows(test.n_rows(), config.max_explanations);
        const int count = static_cast<int>(rows.size());
        s.rows_explained = count;
        StageTimer explain_timer;
        const auto explanations =
            explain_rows(*bundle.model, test, rows, config.lime, config.seed, config.n_threads,
                         stats);
        const fs::path expl_dir = out_dir / "explanations" / kind;
        fs::create_directories(expl_dir);
        for (int i = 0; i < count; ++i) {
            write_json_file(explanation_to_json(explanations[static_cast<std::size_t>(i)],
                                                feature_names, rows[static_cast<std::size_t>(i)]),
                            (expl_dir / row_file_name(rows[static_cast<std::size_t>(i)])).string());
        }
        std::cout << "[explain " << kind << "] " << count << " rows in "
                  << explain_timer.seconds() << "s" << std::endl;

        s.lime_table = lime_accuracy_from(explanations, test.n_classes);
        ojson table_j = lime_table_to_json(s.lime_table);
        table_j["rows_explained"] = count;
        write_json_file(table_j, path("lime_table_" + kind + ".json"));

        double r2_total = 0;
        ojson r2_list = ojson::array();
        for (const auto& e : explanations) {
            r2_total += e.local_r2;
            r2_list.push_back(e.local_r2);
        }
        s.mean_r2 = r2_total / count;
        ojson soundness_j;
        soundness_j["mean_r2"] = s.mean_r2;
        soundness_j["per_instance_r2"] = std::move(r2_list);
        write_json_file(soundness_j, path("soundness_" + kind + ".json"));

        // --- importance ------------------------------------------------
        s.aggregate = aggregate_lime_importance(explanations, feature_names, test.n_classes, 5);
        write_json_file(lime_aggregate_to_json(s.aggregate),
                        path("importance_lime_" + kind + ".json"));
        write_importance_csv(s.aggregate.overall, path("importance_lime_" + kind + ".csv"));
        for (int i = 0; i < config.topk_lime &&
                        i < static_cast<int>(s.aggregate.overall.ranking.size());
             ++i) {
            s.lime_top.push_back(
                feature_names[static_cast<std::size_t>(s.aggregate.overall.ranking[i])]);
        }

        s.has_gini = kind == "dt" || kind == "rf" || kind == "gb";
        if (s.has_gini) {
            const auto gini = model_importance(*bundle.model, feature_names);
            write_json_file(importance_to_json(gini), path("importance_gini_" + kind + ".json"));
            write_importance_csv(gini, path("importance_gini_" + kind + ".csv"));
            for (int i = 0;
                 i < config.topk_gini && i < static_cast<int>(gini.ranking.size()); ++i) {
                s.gini_top.push_back(feature_names[static_cast<std::size_t>(gini.ranking[i])]);
            }
        }

        // --- top-k retrain ---------------------------------------------
        ojson retrain_j;
        s.retrain_lime = topk_retrain(dataset, kind, params, s.lime_top, config.seed,
                                      config.train_fraction, config.n_threads);
        ojson rl;
        rl["selected_features"] = s.retrain_lime.selected_features;
        rl["accuracy_full"] = s.retrain_lime.accuracy_full;
        rl["accuracy_topk"] = s.retrain_lime.accuracy_topk;
        rl["delta"] = s.retrain_lime.accuracy_topk - s.retrain_lime.accuracy_full;
        retrain_j["lime_top" + std::to_string(config.topk_lime)] = std::move(rl);
        if (s.has_gini) {
            s.retrain_gini = topk_retrain(dataset, kind, params, s.gini_top, config.seed,
                                          config.train_fraction, config.n_threads);
            ojson rg;
            rg["selected_features"] = s.retrain_gini.selected_features;
            rg["accuracy_full"] = s.retrain_gini.accuracy_full;
            rg["accuracy_topk"] = s.retrain_gini.accuracy_topk;
            rg["delta"] = s.retrain_gini.accuracy_topk - s.retrain_gini.accuracy_full;
            retrain_j["gini_top" + std::to_string(config.topk_gini)] = std::move(rg);
        }
        write_json_file(retrain_j, path("retrain_" + kind + ".json"));

        s.top1 = avg_top1_probability(*bundle.model, test);
        summaries.push_back(std::move(s));
    }

    ojson top1_j = ojson::object();
    for (const auto& s : summaries) top1_j[s.kind] = s.top1;
    write_json_file(top1_j, path("top1_probability.json"));

    const double factsheet_r2 = summaries.empty() ? 0.0 : summaries.front().mean_r2;
    const FactSheet sheet = build_factsheet(factsheet_r2);
    write_json_file(factsheet_to_json(sheet), path("factsheet.json"));
    {
        std::ofstream txt(path("factsheet.txt"), std::ios::binary);
        txt << factsheet_to_text(sheet);
    }

    // --- summary --------------------------------------------------------
    std::ostringstream sum;
    sum << "Explainable multi-class classification summary\n";
    sum << "seed " << config.seed << ", " << dataset.n_rows() << " rows, "
        << dataset.n_features() << " features, " << dataset.n_classes << " classes\n";
    sum << "\n== Model evaluation ==\n";
    for (const auto& s : summaries) {
        sum << s.kind << ": accuracy " << pct(s.metrics.accuracy) << ", micro f1 "
            << pct(s.metrics.micro_f1) << ", config " << s.params.dump() << "\n";
    }
    for (const auto& s : summaries) {
        sum << "\n== LIME prediction accuracy (" << s.kind << ", " << s.rows_explained
            << " rows) ==\n";
        for (std::size_t k = 0; k < s.lime_table.correct.size(); ++k) {
            sum << "class " << k + 1 << ": correct " << s.lime_table.correct[k] << ", incorrect "
                << s.lime_table.incorrect[k] << ", accuracy " << pct(s.lime_table.accuracy[k])
                << "\n";
        }
        sum << "total: correct " << s.lime_table.total_correct << ", incorrect "
            << s.lime_table.total_incorrect << ", accuracy " << pct(s.lime_table.total_accuracy)
            << "\n";
    }
    for (const auto& s : summaries) {
        sum << "\n== Top five influential features per class (" << s.kind << ", LIME) ==\n";
        for (std::size_t k = 0; k < s.aggregate.top_per_class.size(); ++k) {
            sum << "class " << k + 1 << ":";
            for (int f : s.aggregate.top_per_class[k]) {
                sum << " " << feature_names[static_cast<std::size_t>(f)];
            }
            sum << "\n";
        }
    }
    for (const auto& s : summaries) {
        if (!s.has_gini) continue;
        sum << "\n== Feature importance (" << s.kind << ", Gini, top " << s.gini_top.size()
            << ") ==\n";
        for (std::size_t i = 0; i < s.gini_top.size(); ++i) {
            sum << i + 1 << ". " << s.gini_top[i] << "\n";
        }
    }
    sum << "\n== Retrain on top features ==\n";
    for (const auto& s : summaries) {
        sum << s.kind << " full " << pct(s.retrain_lime.accuracy_full) << ", LIME top-"
            << config.topk_lime << " " << pct(s.retrain_lime.accuracy_topk);
        if (s.has_gini) {
            sum << ", Gini top-" << config.topk_gini << " " << pct(s.retrain_gini.accuracy_topk);
        }
        sum << "\n";
    }
    sum << "\n== Explanation soundness (mean local R^2) ==\n";
    for (const auto& s : summaries) sum << s.kind << ": " << s.mean_r2 << "\n";
    sum << "\n== Mean top-1 probability ==\n";
    for (const auto& s : summaries) sum << s.kind << ": " << pct(s.top1) << "\n";
    {
        std::ofstream txt(path("summary.txt"), std::ios::binary);
        txt << sum.str();
    }
    std::cout << "[done] artifacts in " << out_dir.string() << std::endl;
}

} // namespace xmc
