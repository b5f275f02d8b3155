#include "xmc/evaluation.hpp"

#include "xmc/errors.hpp"
#include "xmc/rng.hpp"
#include "xmc/synth.hpp"

#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"

using namespace xmc;
using namespace xmc::test;

TEST_CASE("micro_metrics") {
    SUBCASE("all correct scores 1 everywhere") {
        const std::vector<int> y = {1, 2, 3, 4};
        const auto m = micro_metrics(y, y, 4);
        CHECK(m.accuracy == 1.0);
        CHECK(m.micro_precision == 1.0);
        CHECK(m.micro_recall == 1.0);
        CHECK(m.micro_f1 == 1.0);
    }
    SUBCASE("hand-counted 3-of-4") {
        const std::vector<int> labels = {1, 1, 2, 3};
        const std::vector<int> preds = {1, 2, 2, 3};
        const auto m = micro_metrics(preds, labels, 3);
        CHECK(m.accuracy == 0.75);
        CHECK(m.confusion[0][0] == 1);
        CHECK(m.confusion[0][1] == 1);
        CHECK(m.confusion[1][1] == 1);
        CHECK(m.confusion[2][2] == 1);
    }
    SUBCASE("micro identity on random vectors is bitwise exact") {
        Rng rng(3);
        for (int it = 0; it < 100; ++it) {
            const int n = 1 + rng.index(50);
            std::vector<int> labels, preds;
            for (int i = 0; i < n; ++i) {
                labels.push_back(1 + rng.index(6));
                preds.push_back(1 + rng.index(6));
            }
            const auto m = micro_metrics(preds, labels, 6);
            CHECK(m.micro_f1 == m.accuracy);
            CHECK(m.micro_precision == m.accuracy);
            CHECK(m.micro_recall == m.accuracy);
        }
    }
    SUBCASE("length mismatch is an error") {
        const std::vector<int> a = {1, 2};
        const std::vector<int> b = {1};
        CHECK_THROWS_AS(static_cast<void>(micro_metrics(a, b, 2)), DataError);
    }
}

TEST_CASE("stratified folds") {
    const auto ds = random_dataset(103, 3, 4, 5);

    SUBCASE("fold sizes differ by at most one per class") {
        const auto fold_ids = stratified_fold_ids(ds, 5, 1);
        for (int k = 1; k <= 4; ++k) {
            std::vector<int> per_fold(5, 0);
            for (int r = 0; r < ds.n_rows(); ++r) {
                if (ds.y[static_cast<std::size_t>(r)] == k) {
                    ++per_fold[static_cast<std::size_t>(fold_ids[static_cast<std::size_t>(r)])];
                }
            }
            const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
            CHECK(*hi - *lo <= 1);
        }
    }
    SUBCASE("folds partition the rows") {
        const auto fold_ids = stratified_fold_ids(ds, 4, 2);
        for (int id : fold_ids) {
            CHECK(id >= 0);
            CHECK(id < 4);
        }
    }
    SUBCASE("class smaller than fold count is an error") {
        auto small = make_dataset({{1}, {2}, {3}}, {1, 1, 2}, 2);
        CHECK_THROWS_AS(static_cast<void>(stratified_fold_ids(small, 2, 1)), DataError);
    }
}

TEST_CASE("cross_validate on a constant-label dataset scores a perfect mean") {
    // Single-class data: any prior-following model predicts it always.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    Rng rng(9);
    for (int i = 0; i < 40; ++i) {
        rows.push_back({rng.uniform(), rng.uniform()});
        labels.push_back(1);
    }
    const auto ds = make_dataset(rows, labels, 1);
    ojson params;
    params["max_depth"] = 2;
    params["max_features"] = -1;
    const auto cv = cross_validate("dt", params, ds, 4, 7);
    CHECK(cv.mean == 1.0);
    CHECK(cv.stddev == 0.0);
    REQUIRE(cv.fold_accuracy.size() == 4);
    for (double a : cv.fold_accuracy) CHECK(a == 1.0);
}

TEST_CASE("cross_validate is deterministic and sane on drifting data") {
    const auto ds = synth_generate({40, 3, 1.5, 3});
    ojson params;
    params["n_estimators"] = 10;
    params["max_features"] = -1;
    const auto a = cross_validate("rf", params, ds, 3, 11);
    const auto b = cross_validate("rf", params, ds, 3, 11);
    CHECK(a.fold_accuracy == b.fold_accuracy);
    CHECK(a.mean > 1.0 / 6.0);
    double mean = 0;
    for (double acc : a.fold_accuracy) mean += acc;
    CHECK(a.mean == doctest::Approx(mean / 3).epsilon(1e-12));
}

TEST_CASE("grid_search") {
    const auto ds = synth_generate({25, 3, 1.5, 13});

    SUBCASE("single-point grid returns that point") {
        ojson grid;
        grid["max_depth"] = {3};
        grid["n_estimators"] = {5};
        const auto result = grid_search("rf", grid, ds, 2, 3);
        CHECK(result.best_params.at("max_depth") == 3);
        CHECK(result.best_params.at("n_estimators") == 5);
        CHECK(result.evaluated.size() == 1);
    }
    SUBCASE("the result maximizes CV mean over the whole grid") {
        ojson grid;
        grid["max_depth"] = {1, 4};
        grid["n_estimators"] = {3, 10};
        const auto result = grid_search("rf", grid, ds, 2, 5);
        CHECK(result.evaluated.size() == 4);
        for (const auto& [point, mean] : result.evaluated) {
            CHECK(result.best_result.mean >= mean);
        }
        // Direct CV of the winner agrees with the recorded score.
        const auto direct = cross_validate("rf", result.best_params, ds, 2, 5);
        CHECK(direct.mean == result.best_result.mean);
    }
    SUBCASE("tie goes to the first point in grid order") {
        // A constant-label dataset makes every config score 1.0.
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            rows.push_back({rng.uniform()});
            labels.push_back(1);
        }
        const auto flat = make_dataset(rows, labels, 1);
        ojson grid;
        grid["max_depth"] = {2, 3};
        const auto result = grid_search("dt", grid, flat, 2, 1);
        CHECK(result.best_params.at("max_depth") == 2);
    }
    SUBCASE("default grids contain the shipped best configurations") {
        const auto gb = default_grid("gb");
        bool lr_ok = false, depth_ok = false, trees_ok = false;
        for (const auto& v : gb.at("learning_rate")) lr_ok |= v == 0.1;
        for (const auto& v : gb.at("max_depth")) depth_ok |= v == 1;
        for (const auto& v : gb.at("n_estimators")) trees_ok |= v == 150;
        CHECK(lr_ok);
        CHECK(depth_ok);
        CHECK(trees_ok);
        const auto rf = default_grid("rf");
        bool rf_depth = false, rf_trees = false, rf_split = false;
        for (const auto& v : rf.at("max_depth")) rf_depth |= v == 6;
        for (const auto& v : rf.at("n_estimators")) rf_trees |= v == 500;
        for (const auto& v : rf.at("min_samples_split")) rf_split |= v == 4;
        CHECK(rf_depth);
        CHECK(rf_trees);
        CHECK(rf_split);
    }
}

TEST_CASE("lime_accuracy_table equals direct model accuracy per class") {
    const auto ds = synth_generate({30, 3, 1.5, 17});
    const auto [train, test] = stratified_split(ds, 0.8, 1);
    ojson params;
    params["n_estimators"] = 8;
    params["max_features"] = -1;
    const auto bundle = train_model("rf", params, train, 5);
    const TrainStats stats = TrainStats::from(train);
    LimeConfig config;
    config.num_samples = 120;
    config.seed = 3;
    const auto table = lime_accuracy_table(*bundle.model, test, config, stats);

    // predict_proba as the oracle: per-class counts must match exactly.
    std::vector<long long> correct(6, 0), incorrect(6, 0);
    for (int r = 0; r < test.n_rows(); ++r) {
        const int want = test.y[static_cast<std::size_t>(r)];
        const int got = bundle.model->predict(test.row(r));
        if (got == want) ++correct[static_cast<std::size_t>(want - 1)];
        else ++incorrect[static_cast<std::size_t>(want - 1)];
    }
    CHECK(table.correct == correct);
    CHECK(table.incorrect == incorrect);

    SUBCASE("totals equal micro accuracy on the same rows") {
        const auto preds = bundle.model->predict_all(test);
        const auto metrics = micro_metrics(preds, test.y, test.n_classes);
        CHECK(table.total_accuracy == metrics.accuracy);
    }
}

TEST_CASE("lime table on a perfect classifier is 100% per class") {
    // Classes fully separated on one feature; a deep tree is exact.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    Rng rng(21);
    for (int k = 1; k <= 3; ++k) {
        for (int i = 0; i < 12; ++i) {
            rows.push_back({k * 100.0 + rng.uniform(), rng.uniform()});
            labels.push_back(k);
        }
    }
    const auto ds = make_dataset(rows, labels, 3);
    ojson params;
    params["max_depth"] = -1;
    params["max_features"] = -1;
    params["min_samples_leaf"] = 1;
    params["min_samples_split"] = 2;
    const auto bundle = train_model("dt", params, ds, 1);
    const TrainStats stats = TrainStats::from(ds);
    LimeConfig config;
    config.num_samples = 60;
    config.num_features_k = 2;
    const auto table = lime_accuracy_table(*bundle.model, ds, config, stats);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(table.accuracy[k] == 1.0);
        CHECK(table.incorrect[k] == 0);
    }
    CHECK(table.total_accuracy == 1.0);
}

TEST_CASE("avg_top1_probability endpoints") {
    const auto ds = random_dataset(30, 2, 6, 23);

    SUBCASE("a deterministic one-hot predictor scores 1") {
        // A deep tree on separable data is one-hot at the leaves.
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (int i = 0; i < 24; ++i) {
            rows.push_back({static_cast<double>(i)});
            labels.push_back(1 + i % 6);
        }
        const auto sep = make_dataset(rows, labels, 6);
        ojson params;
        params["max_depth"] = -1;
        params["max_features"] = -1;
        params["min_samples_leaf"] = 1;
        params["min_samples_split"] = 2;
        const auto bundle = train_model("dt", params, sep, 1);
        CHECK(avg_top1_probability(*bundle.model, sep) == 1.0);
    }
    SUBCASE("a uniform predictor scores 1/6") {
        ojson params;
        params["epochs"] = 1;
        params["step"] = 0.0;
        const auto bundle = train_model("lr", params, ds, 1);
        CHECK(avg_top1_probability(*bundle.model, ds) == doctest::Approx(1.0 / 6).epsilon(1e-12));
    }
}
