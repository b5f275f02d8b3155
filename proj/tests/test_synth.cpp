#include "xmc/synth.hpp"

#include "xmc/errors.hpp"
#include "xmc/evaluation.hpp"
#include "xmc/survey.hpp"
#include "xmc/tree.hpp"

#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"

using namespace xmc;
using namespace xmc::test;

TEST_CASE("synth schema shape") {
    const auto schema = synth_schema();
    CHECK(schema.size() == 57);
    CHECK(schema.index_of("Q4_1") >= 0);
    CHECK(schema.index_of("Q18") >= 0);
    CHECK(schema.index_of("Q19") >= 0);
    CHECK(schema.index_of("Q16") == -1);   // dropped upstream, never generated
    CHECK(schema.index_of("Q23CP") == -1); // wave-5/6 extra, never generated
    CHECK(schema.at(schema.index_of("Q4_1")).kind == FeatureKind::one_hot);
    CHECK(schema.at(schema.index_of("Q18")).kind == FeatureKind::numeric);

    const auto planted = planted_feature_names(3);
    CHECK(planted == std::vector<std::string>{"Q4_1", "Q18", "Q19"});
    CHECK(planted_feature_names(5).size() == 5);
    CHECK(planted_feature_names(0).empty());
}

TEST_CASE("synth_generate shape and labels") {
    const auto ds = synth_generate({50, 3, 1.0, 1});
    CHECK(ds.n_rows() == 300);
    CHECK(ds.n_classes == 6);
    CHECK_FALSE(ds.has_missing());
    const auto counts = ds.class_counts();
    for (int k = 0; k < 6; ++k) CHECK(counts[static_cast<std::size_t>(k)] == 50);
}

TEST_CASE("synth_generate determinism: same seed, identical bytes") {
    const SynthConfig config{30, 3, 1.5, 99};
    const auto a = synth_generate(config);
    const auto b = synth_generate(config);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);

    TempDir dir("synthdet");
    write_dataset_csv(a, dir.file("a.csv"));
    write_dataset_csv(b, dir.file("b.csv"));
    CHECK(read_file(dir.file("a.csv")) == read_file(dir.file("b.csv")));

    const auto c = synth_generate({30, 3, 1.5, 100});
    CHECK(a.x != c.x);
}

TEST_CASE("planted means drift monotonically with the wave") {
    const auto ds = synth_generate({400, 3, 1.2, 5});
    const int q18 = ds.schema.index_of("Q18");
    const int q4_1 = ds.schema.index_of("Q4_1");
    double prev_mean = -1e9, prev_rate = -1.0;
    for (int wave = 1; wave <= 6; ++wave) {
        double sum = 0, rate = 0;
        int n = 0;
        for (int r = 0; r < ds.n_rows(); ++r) {
            if (ds.y[static_cast<std::size_t>(r)] != wave) continue;
            sum += ds.at(r, q18);
            rate += ds.at(r, q4_1);
            ++n;
        }
        CHECK(sum / n > prev_mean);
        CHECK(rate / n > prev_rate);
        prev_mean = sum / n;
        prev_rate = rate / n;
    }
}

TEST_CASE("zero drift leaves a stump's CV accuracy at chance level") {
    // With drift 0 every feature is wave-independent; a depth-1 tree's
    // cross-validated accuracy must sit inside the chance binomial interval.
    const auto ds = synth_generate({150, 3, 0.0, 21});
    ojson params;
    params["max_depth"] = 1;
    params["max_features"] = -1;
    params["min_samples_leaf"] = 1;
    params["min_samples_split"] = 2;
    const auto cv = cross_validate("dt", params, ds, 5, 2);
    const double n = ds.n_rows(); // every row is predicted exactly once
    const double p = 1.0 / 6.0;
    // 99% two-sided normal interval around the chance mean.
    CHECK(std::fabs(cv.mean - p) <= 2.58 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("invalid synth configs are rejected") {
    CHECK_THROWS_AS(static_cast<void>(synth_generate({0, 3, 1.0, 1})), DataError);
    CHECK_THROWS_AS(static_cast<void>(synth_generate({10, 500, 1.0, 1})), DataError);
    CHECK_THROWS_AS(static_cast<void>(synth_generate({10, -1, 1.0, 1})), DataError);
}
