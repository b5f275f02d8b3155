#include "xmc/tree.hpp"

#include "xmc/errors.hpp"
#include "xmc/rng.hpp"
#include "xmc/synth.hpp"
#include "xmc/survey.hpp"

#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"

using namespace xmc;
using namespace xmc::test;

TEST_CASE("forest of one tree without bootstrap equals a single tree") {
    const auto ds = random_dataset(150, 4, 3, 12);
    ForestParams fp;
    fp.n_estimators = 1;
    fp.bootstrap = false;
    fp.tree = TreeParams{-1, -1, 2, 1};
    const auto forest = fit_forest(ds, fp, 5);
    // The single forest tree consumes the bootstrap-free stream identically.
    const auto tree = fit_tree(ds, fp.tree, derive_seed(5, 0));
    for (int r = 0; r < ds.n_rows(); ++r) {
        CHECK(forest.predict_proba(ds.row(r)).probs == tree.predict_proba(ds.row(r)).probs);
    }
}

TEST_CASE("forest prediction is the mean of tree distributions") {
    const auto ds = random_dataset(100, 3, 4, 21);
    ForestParams fp;
    fp.n_estimators = 7;
    fp.tree = TreeParams{4, 2, 2, 1};
    const auto forest = fit_forest(ds, fp, 3);
    REQUIRE(static_cast<int>(forest.trees().size()) == fp.n_estimators);
    for (int r = 0; r < 10; ++r) {
        std::vector<double> mean(4, 0.0);
        for (const auto& tree : forest.trees()) {
            const auto p = tree.root().descend(ds.row(r)).class_proportions;
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
        }
        for (auto& v : mean) v /= fp.n_estimators;
        CHECK(forest.predict_proba(ds.row(r)).probs == mean);
    }
}

TEST_CASE("forest fitting is deterministic and thread-count independent") {
    const auto ds = random_dataset(200, 5, 3, 31);
    ForestParams fp;
    fp.n_estimators = 12;
    fp.tree = TreeParams{5, 3, 2, 1};
    const auto serial = fit_forest(ds, fp, 9, 1);
    const auto parallel = fit_forest(ds, fp, 9, 4);
    for (int r = 0; r < ds.n_rows(); ++r) {
        CHECK(serial.predict_proba(ds.row(r)).probs == parallel.predict_proba(ds.row(r)).probs);
    }
}

TEST_CASE("paper-style forest configuration trains") {
    const auto ds = random_dataset(120, 6, 6, 41);
    ForestParams fp;
    fp.n_estimators = 25; // scaled-down tree count, full config otherwise
    fp.tree = TreeParams{6, 61, 4, 1};
    const auto forest = fit_forest(ds, fp, 42);
    CHECK(static_cast<int>(forest.trees().size()) == 25);
    const auto dist = forest.predict_proba(ds.row(0));
    double total = 0;
    for (double p : dist.probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("forest beats chance on planted synthetic drift") {
    const auto ds = synth_generate({200, 3, 1.5, 7});
    const auto [train, test] = stratified_split(ds, 0.8, 7);
    ForestParams fp;
    fp.n_estimators = 40;
    fp.tree = TreeParams{6, -1, 4, 1};
    const auto forest = fit_forest(train, fp, 7);
    int correct = 0;
    for (int r = 0; r < test.n_rows(); ++r) {
        correct += forest.predict(test.row(r)) == test.y[static_cast<std::size_t>(r)];
    }
    const double accuracy = static_cast<double>(correct) / test.n_rows();
    CHECK(accuracy > 0.40); // chance is 1/6
}

TEST_CASE("gbm with zero learning rate predicts the class priors") {
    const auto ds = random_dataset(60, 3, 3, 17);
    GbmParams gp;
    gp.learning_rate = 0.0;
    gp.n_estimators = 5;
    gp.max_depth = 1;
    const auto gbm = fit_gbm(ds, gp, 1);
    const auto counts = ds.class_counts();
    for (int r = 0; r < 5; ++r) {
        const auto dist = gbm.predict_proba(ds.row(r));
        for (int k = 0; k < 3; ++k) {
            const double prior =
                static_cast<double>(counts[static_cast<std::size_t>(k)]) / ds.n_rows();
            CHECK(dist.probs[static_cast<std::size_t>(k)] ==
                  doctest::Approx(prior).epsilon(1e-12));
        }
    }
}

TEST_CASE("gbm training deviance is non-increasing per round") {
    const auto ds = synth_generate({80, 3, 1.0, 3});
    GbmParams gp;
    gp.learning_rate = 0.1;
    gp.n_estimators = 40;
    gp.max_depth = 1;
    const auto gbm = fit_gbm(ds, gp, 1);
    REQUIRE(gbm.stages().size() == 40);

    // Log-loss recomputed from the serialized stages, round by round.
    double previous = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= 40; ++m) {
        std::vector<ClassDistribution> probs;
        for (int r = 0; r < ds.n_rows(); ++r) {
            probs.push_back(ClassDistribution{softmax(gbm.decision_scores(ds.row(r), m))});
        }
        const double deviance = multinomial_deviance(probs, ds.y);
        CHECK(deviance <= previous + 1e-12);
        previous = deviance;
    }
}

TEST_CASE("gbm round structure matches the configuration") {
    const auto ds = random_dataset(90, 4, 4, 23);
    GbmParams gp;
    gp.learning_rate = 0.1;
    gp.n_estimators = 15;
    gp.max_depth = 1;
    const auto gbm = fit_gbm(ds, gp, 2);
    REQUIRE(gbm.stages().size() == 15);
    for (const auto& round : gbm.stages()) {
        CHECK(round.size() == 4); // one regression tree per class
        for (const auto& tree : round) {
            // Depth-1 stumps: either a leaf or a root with two leaf children.
            if (!tree->is_leaf()) {
                CHECK(tree->left->is_leaf());
                CHECK(tree->right->is_leaf());
            }
        }
    }
}

TEST_CASE("gbm probabilities sum to one on random inputs") {
    const auto ds = random_dataset(70, 5, 6, 29);
    const auto gbm = fit_gbm(ds, GbmParams{0.1, 25, 2, 2, 1}, 4);
    Rng rng(5);
    for (int it = 0; it < 50; ++it) {
        std::vector<double> row;
        for (int c = 0; c < 5; ++c) row.push_back(rng.uniform() * 10);
        const auto dist = gbm.predict_proba(row);
        double total = 0;
        for (double p : dist.probs) {
            CHECK(p >= 0.0);
            total += p;
        }
        CHECK(std::fabs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("gbm requires at least two classes") {
    auto ds = make_dataset({{1.0}, {2.0}}, {1, 1}, 1);
    CHECK_THROWS_AS(static_cast<void>(fit_gbm(ds, GbmParams{}, 1)), DataError);
}
