// xmc - explainable multi-class classification of multi-wave survey data.
//
// Subcommands cover the whole pipeline: data ingestion / synthesis, model
// training and tuning, evaluation, LIME explanations, impurity and LIME
// feature importance, top-k retraining, the explainability fact sheet, and
// a one-shot run-all orchestrator.

#include "xmc/errors.hpp"
#include "xmc/evaluation.hpp"
#include "xmc/factsheet.hpp"
#include "xmc/importance.hpp"
#include "xmc/pipeline.hpp"
#include "xmc/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace xmc;
namespace fs = std::filesystem;

ojson load_optional_json(const std::string& path) {
    if (path.empty()) return ojson(nullptr);
    return read_json_file(path);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    for (char c : csv) {
        if (c == ',') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

// The dataset the model was trained on and the one being explained must
// agree on schema order.
void check_schema(const ModelBundle& bundle, const Dataset& ds) {
    if (bundle.feature_names != ds.schema.names()) {
        throw DataError("dataset schema does not match the model's feature names");
    }
}

int run(int argc, char** argv) {
    CLI::App app{"explainable multi-class classification of multi-wave survey data"};
    app.require_subcommand(1);
    app.fallthrough(); // global --seed/--threads may follow the subcommand

    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "root RNG seed")->capture_default_str();
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();

    // --- ingest ---------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "preprocess per-wave CSVs into one dataset");
    std::vector<std::string> wave_paths;
    std::string out_path, stats_path, missing_path;
    ingest->add_option("--waves", wave_paths, "wave CSV files, wave 1..n order")
        ->required()
        ->expected(-1);
    ingest->add_option("--out", out_path, "output dataset CSV")->required();
    ingest->add_option("--stats", stats_path, "imputation stats JSON");
    ingest->add_option("--missing", missing_path, "missingness report JSON");
    ingest->callback([&] {
        IngestResult result = ingest_waves(wave_paths);
        write_dataset_csv(result.dataset, out_path);
        if (!stats_path.empty()) write_json_file(imputation_to_json(result.imputation), stats_path);
        if (!missing_path.empty()) {
            write_json_file(missingness_to_json(result.missingness), missing_path);
        }
        std::cout << "wrote " << result.dataset.n_rows() << " rows x "
                  << result.dataset.n_features() << " features to " << out_path << std::endl;
    });

    // --- synth ----------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate schema-compatible synthetic data");
    SynthConfig synth_config;
    synth->add_option("--rows", synth_config.rows_per_wave, "rows per wave")
        ->capture_default_str();
    synth->add_option("--drift", synth_config.drift_strength, "planted drift strength")
        ->capture_default_str();
    synth->add_option("--planted", synth_config.n_planted, "planted feature count")
        ->capture_default_str();
    synth->add_option("--out", out_path, "output dataset CSV")->required();
    synth->callback([&] {
        synth_config.seed = seed;
        const Dataset ds = synth_generate(synth_config);
        write_dataset_csv(ds, out_path);
        std::cout << "wrote " << ds.n_rows() << " rows x " << ds.n_features() << " features to "
                  << out_path << std::endl;
    });

    // --- report-missing --------------------------------------------------
    auto* report_missing = app.add_subcommand("report-missing", "missing-cell counts per feature");
    report_missing->add_option("--waves", wave_paths, "wave CSV files")->required()->expected(-1);
    report_missing->add_option("--out", out_path, "report JSON (stdout when omitted)");
    report_missing->callback([&] {
        std::vector<RawSurveyTable> tables;
        for (std::size_t i = 0; i < wave_paths.size(); ++i) {
            tables.push_back(load_wave_csv(wave_paths[i], static_cast<int>(i) + 1));
        }
        const auto report = missingness_to_json(missingness_report(tables));
        if (out_path.empty()) std::cout << report.dump(2) << std::endl;
        else write_json_file(report, out_path);
    });

    // --- train ------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "fit a model and save it as JSON");
    std::string model_kind, data_path, config_path, model_path;
    train_cmd->add_option("--model", model_kind, "dt|rf|gb|nb|lr|svm")->required();
    train_cmd->add_option("--data", data_path, "training dataset CSV")->required();
    train_cmd->add_option("--config", config_path, "hyperparameter JSON");
    train_cmd->add_option("--out", model_path, "output model JSON")->required();
    train_cmd->callback([&] {
        if (!known_model_kind(model_kind)) throw UsageError("unknown model kind " + model_kind);
        const Dataset train = read_dataset_csv(data_path);
        const auto t0 = std::chrono::steady_clock::now();
        const ModelBundle bundle = train_model(model_kind, load_optional_json(config_path), train,
                                               derive_seed(seed, seed_stream::train), threads);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        save_model(bundle, model_path);
        std::cout << "trained " << model_kind << " on " << train.n_rows() << " rows in " << secs
                  << "s -> " << model_path << std::endl;
    });

    // --- tune -------------------------------------------------------------
    auto* tune = app.add_subcommand("tune", "grid search by stratified CV mean accuracy");
    std::string grid_path;
    int folds = 10;
    tune->add_option("--model", model_kind, "dt|rf|gb")->required();
    tune->add_option("--data", data_path, "dataset CSV")->required();
    tune->add_option("--grid", grid_path, "grid JSON (default grid when omitted)");
    tune->add_option("--folds", folds, "CV folds")->capture_default_str();
    tune->add_option("--out", out_path, "result JSON")->required();
    tune->callback([&] {
        const Dataset ds = read_dataset_csv(data_path);
        const auto result = grid_search(model_kind, load_optional_json(grid_path), ds, folds,
                                        derive_seed(seed, seed_stream::tune), threads);
        ojson j;
        j["best_params"] = result.best_params;
        j["best_cv"] = cv_to_json(result.best_result);
        ojson evaluated = ojson::array();
        for (const auto& [point, mean] : result.evaluated) {
            ojson e;
            e["params"] = point;
            e["cv_mean"] = mean;
            evaluated.push_back(std::move(e));
        }
        j["evaluated"] = std::move(evaluated);
        write_json_file(j, out_path);
        std::cout << "best cv mean " << result.best_result.mean << " with "
                  << result.best_params.dump() << std::endl;
    });

    // --- evaluate -----------------------------------------------------------
    auto* evaluate = app.add_subcommand(
        "evaluate", "holdout metrics of a fitted model, or k-fold CV of its configuration");
    int eval_folds = 0;
    evaluate->add_option("--model", model_path, "model JSON")->required();
    evaluate->add_option("--data", data_path, "dataset CSV")->required();
    evaluate->add_option("--folds", eval_folds, "refit with stratified CV instead of holdout");
    evaluate->add_option("--out", out_path, "metrics JSON")->required();
    evaluate->callback([&] {
        const ModelBundle bundle = load_model(model_path);
        const Dataset ds = read_dataset_csv(data_path);
        check_schema(bundle, ds);
        ojson j;
        if (eval_folds >= 2) {
            const auto cv = cross_validate(bundle.model->kind(), bundle.params, ds, eval_folds,
                                           derive_seed(seed, seed_stream::cv), threads);
            j = cv_to_json(cv);
            std::cout << "cv mean accuracy " << cv.mean << " (std " << cv.stddev << ")"
                      << std::endl;
        } else {
            const auto preds = bundle.model->predict_all(ds);
            Metrics m = micro_metrics(preds, ds.y, ds.n_classes);
            j = metrics_to_json(m, false);
            std::cout << "accuracy " << m.accuracy << " on " << ds.n_rows() << " rows"
                      << std::endl;
        }
        write_json_file(j, out_path);
    });

    // --- explain -------------------------------------------------------------
    auto* explain = app.add_subcommand("explain", "LIME explanation of one dataset row");
    LimeConfig lime;
    int row_index = 0;
    explain->add_option("--model", model_path, "model JSON")->required();
    explain->add_option("--data", data_path, "dataset CSV (explanation neighborhood source)")
        ->required();
    explain->add_option("--row", row_index, "0-based row to explain")->required();
    explain->add_option("--samples", lime.num_samples, "perturbation samples")
        ->capture_default_str();
    explain->add_option("--topk", lime.num_features_k, "reported top features")
        ->capture_default_str();
    explain->add_option("--kernel-width", lime.kernel_width,
                        "proximity kernel width (0 = 0.75*sqrt(d))");
    explain->add_option("--lambda", lime.ridge_lambda, "ridge penalty")->capture_default_str();
    explain->add_option("--out", out_path, "explanation JSON")->required();
    explain->callback([&] {
        const ModelBundle bundle = load_model(model_path);
        const Dataset ds = read_dataset_csv(data_path);
        check_schema(bundle, ds);
        if (row_index < 0 || row_index >= ds.n_rows()) {
            throw UsageError("row " + std::to_string(row_index) + " outside dataset");
        }
        const TrainStats stats = TrainStats::from(ds);
        lime.seed = derive_seed(derive_seed(seed, seed_stream::explain),
                                static_cast<std::uint64_t>(row_index));
        auto expl = explain_instance(*bundle.model, ds.row(row_index), lime, stats);
        expl.true_label = ds.y[static_cast<std::size_t>(row_index)];
        write_json_file(explanation_to_json(expl, bundle.feature_names, row_index), out_path);
        std::cout << "row " << row_index << ": predicted label " << expl.predicted_label
                  << " (p=" << expl.top1_probability << "), local R^2 " << expl.local_r2
                  << std::endl;
    });

    // --- lime-table -----------------------------------------------------------
    auto* lime_table = app.add_subcommand("lime-table", "per-class LIME prediction accuracy");
    std::string train_path;
    lime_table->add_option("--model", model_path, "model JSON")->required();
    lime_table->add_option("--data", data_path, "test dataset CSV")->required();
    lime_table->add_option("--train", train_path,
                           "training dataset CSV for neighborhood stats (default: --data)");
    lime_table->add_option("--samples", lime.num_samples, "perturbation samples")
        ->capture_default_str();
    lime_table->add_option("--out", out_path, "table JSON")->required();
    lime_table->callback([&] {
        const ModelBundle bundle = load_model(model_path);
        const Dataset test = read_dataset_csv(data_path);
        check_schema(bundle, test);
        const Dataset train = train_path.empty() ? test : read_dataset_csv(train_path);
        const TrainStats stats = TrainStats::from(train);
        lime.seed = derive_seed(seed, seed_stream::explain);
        const auto table = lime_accuracy_table(*bundle.model, test, lime, stats, threads);
        write_json_file(lime_table_to_json(table), out_path);
        std::cout << "total LIME prediction accuracy " << table.total_accuracy << std::endl;
    });

    // --- importance -----------------------------------------------------------
    auto* importance = app.add_subcommand("importance", "impurity-based feature importance");
    importance->add_option("--model", model_path, "model JSON (dt|rf|gb)")->required();
    importance->add_option("--out", out_path, "importance JSON")->required();
    importance->callback([&] {
        const ModelBundle bundle = load_model(model_path);
        const auto report = model_importance(*bundle.model, bundle.feature_names);
        write_json_file(importance_to_json(report), out_path);
        std::cout << "top feature: "
                  << report.feature_names[static_cast<std::size_t>(report.ranking.at(0))]
                  << std::endl;
    });

    // --- importance-lime --------------------------------------------------------
    auto* importance_lime =
        app.add_subcommand("importance-lime", "aggregate |weight| over saved explanations");
    std::string expl_dir;
    int classes = 6;
    importance_lime->add_option("--explanations", expl_dir, "directory of explanation JSONs")
        ->required();
    importance_lime->add_option("--classes", classes, "number of classes")->capture_default_str();
    importance_lime->add_option("--out", out_path, "aggregate JSON")->required();
    importance_lime->callback([&] {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(expl_dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw DataError("no explanation JSON files in " + expl_dir);
        std::vector<LimeExplanation> explanations;
        std::vector<std::string> names;
        for (const auto& file : files) {
            std::vector<std::string> file_names;
            explanations.push_back(
                explanation_from_json(read_json_file(file.string()), &file_names, nullptr));
            if (names.empty()) names = file_names;
            else if (names != file_names) throw DataError("explanations disagree on schema");
        }
        const auto agg = aggregate_lime_importance(explanations, names, classes, 5);
        write_json_file(lime_aggregate_to_json(agg), out_path);
        std::cout << "aggregated " << explanations.size() << " explanations" << std::endl;
    });

    // --- topk-retrain ------------------------------------------------------------
    auto* retrain = app.add_subcommand("topk-retrain", "full vs feature-subset accuracy");
    std::string features_csv;
    retrain->add_option("--model", model_kind, "dt|rf|gb|nb|lr|svm")->required();
    retrain->add_option("--data", data_path, "dataset CSV")->required();
    retrain->add_option("--features", features_csv, "comma-separated feature names")->required();
    retrain->add_option("--params", config_path, "hyperparameter JSON");
    retrain->add_option("--out", out_path, "result JSON")->required();
    retrain->callback([&] {
        const Dataset ds = read_dataset_csv(data_path);
        const auto result = topk_retrain(ds, model_kind, load_optional_json(config_path),
                                         split_list(features_csv), seed, 0.8, threads);
        ojson j;
        j["selected_features"] = result.selected_features;
        j["accuracy_full"] = result.accuracy_full;
        j["accuracy_topk"] = result.accuracy_topk;
        j["delta"] = result.accuracy_topk - result.accuracy_full;
        write_json_file(j, out_path);
        std::cout << "full " << result.accuracy_full << " -> top-k " << result.accuracy_topk
                  << std::endl;
    });

    // --- factsheet -----------------------------------------------------------------
    auto* factsheet = app.add_subcommand("factsheet", "explainability fact sheet");
    std::string soundness_path, text_path;
    double r2 = 0.0;
    auto* r2_opt = factsheet->add_option("--r2", r2, "mean local R^2 to report");
    factsheet->add_option("--soundness", soundness_path, "soundness JSON with mean_r2");
    factsheet->add_option("--out", out_path, "fact sheet JSON")->required();
    factsheet->add_option("--text", text_path, "rendered text output");
    factsheet->callback([&] {
        if (!soundness_path.empty()) {
            r2 = read_json_file(soundness_path).at("mean_r2").get<double>();
        } else if (r2_opt->count() == 0) {
            throw UsageError("factsheet needs --r2 or --soundness");
        }
        const FactSheet sheet = build_factsheet(r2);
        write_json_file(factsheet_to_json(sheet), out_path);
        if (!text_path.empty()) {
            std::ofstream txt(text_path, std::ios::binary);
            txt << factsheet_to_text(sheet);
        }
    });

    // --- run-all ---------------------------------------------------------------------
    auto* run_all = app.add_subcommand("run-all", "full pipeline into an artifact directory");
    std::string out_dir = "out";
    run_all->add_option("--config", config_path, "run configuration JSON");
    run_all->add_option("--out-dir", out_dir, "artifact directory")->capture_default_str();
    run_all->callback([&] {
        RunConfig config = RunConfig::from_json(load_optional_json(config_path));
        if (app.count("--seed")) config.seed = seed;
        if (app.count("--threads")) config.n_threads = threads;
        if (run_all->count("--out-dir")) config.out_dir = out_dir;
        run_full_pipeline(config);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // usage
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const xmc::UsageError& e) {
        std::cerr << "usage error: " << e.what() << std::endl;
        return 1;
    } catch (const xmc::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << std::endl;
        return 3;
    } catch (const xmc::DataError& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}
