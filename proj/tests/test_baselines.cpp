#include "xmc/baselines.hpp"

#include "xmc/errors.hpp"
#include "xmc/rng.hpp"

#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"

using namespace xmc;
using namespace xmc::test;

TEST_CASE("gaussian nb posterior matches hand Bayes arithmetic") {
    // Two 1-D classes with sample means/variances computed by hand:
    // class 1: {0, 2} -> mean 1, var 1; class 2: {4, 6} -> mean 5, var 1.
    const auto ds = make_dataset({{0}, {2}, {4}, {6}}, {1, 1, 2, 2}, 2);
    const auto nb = fit_gaussian_nb(ds);
    CHECK(nb.means()[0][0] == 1.0);
    CHECK(nb.variances()[0][0] == 1.0);

    const std::vector<double> x = {2.5};
    const auto dist = nb.predict_proba(x);
    // Equal priors and variances: posterior odds = exp(-(d1^2-d2^2)/2).
    const double l1 = std::exp(-(2.5 - 1.0) * (2.5 - 1.0) / 2.0);
    const double l2 = std::exp(-(2.5 - 5.0) * (2.5 - 5.0) / 2.0);
    CHECK(dist.probs[0] == doctest::Approx(l1 / (l1 + l2)).epsilon(1e-9));
    CHECK(dist.probs[1] == doctest::Approx(l2 / (l1 + l2)).epsilon(1e-9));
}

TEST_CASE("gaussian nb symmetric midpoint is 50/50") {
    const auto ds = make_dataset({{-2}, {0}, {0}, {2}}, {1, 1, 2, 2}, 2);
    const auto nb = fit_gaussian_nb(ds);
    const std::vector<double> x = {0.0};
    const auto dist = nb.predict_proba(x);
    CHECK(dist.probs[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gaussian nb identical class-conditionals reduce to the priors") {
    // Same feature values in every class; only priors differ.
    const auto ds = make_dataset({{1}, {2}, {1}, {2}, {1}, {2}, {1}, {2}}, {1, 1, 1, 1, 1, 1, 2, 2},
                                 2);
    const auto nb = fit_gaussian_nb(ds);
    Rng rng(3);
    for (int it = 0; it < 10; ++it) {
        const std::vector<double> x = {rng.uniform() * 3};
        const auto dist = nb.predict_proba(x);
        CHECK(dist.probs[0] == doctest::Approx(0.75).epsilon(1e-9));
    }
}

TEST_CASE("gaussian nb variance floor keeps constant columns usable") {
    const auto ds = make_dataset({{1, 5}, {1, 6}, {0, 7}, {0, 8}}, {1, 1, 2, 2}, 2);
    const auto nb = fit_gaussian_nb(ds, 1e-9);
    CHECK(nb.variances()[0][0] == 1e-9); // indicator constant within class
    const auto dist = nb.predict_proba(ds.row(0));
    CHECK(std::isfinite(dist.probs[0]));
    CHECK(dist.probs[0] > 0.99); // the indicator is decisive
}

TEST_CASE("logistic gradient matches central finite differences") {
    Rng rng(71);
    for (int it = 0; it < 5; ++it) {
        const int n = 12, d = 3, k = 3;
        const auto ds = random_dataset(n, d, k, derive_seed(81, static_cast<std::uint64_t>(it)));
        const auto std_fit = Standardizer::fit(ds);
        std::vector<double> z;
        std::vector<double> buf;
        for (int r = 0; r < n; ++r) {
            std_fit.apply(ds.row(r), buf);
            z.insert(z.end(), buf.begin(), buf.end());
        }
        std::vector<double> params(static_cast<std::size_t>(k) * d + k);
        for (auto& p : params) p = rng.normal() * 0.5;

        std::vector<double> grad;
        logistic_loss_grad(params, z, ds.y, k, d, &grad);
        for (std::size_t j = 0; j < params.size(); ++j) {
            const double h = 1e-6;
            auto plus = params, minus = params;
            plus[j] += h;
            minus[j] -= h;
            const double fd = (logistic_loss_grad(plus, z, ds.y, k, d, nullptr) -
                               logistic_loss_grad(minus, z, ds.y, k, d, nullptr)) /
                              (2 * h);
            CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("logistic separable data reaches high training accuracy") {
    Rng rng(5);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        const int cls = 1 + (i % 2);
        rows.push_back({(cls == 1 ? -2.0 : 2.0) + rng.normal() * 0.2, rng.uniform()});
        labels.push_back(cls);
    }
    const auto ds = make_dataset(rows, labels, 2);
    const auto lr = fit_logistic(ds, 400, 0.5);
    int correct = 0;
    for (int r = 0; r < ds.n_rows(); ++r) {
        correct += lr.predict(ds.row(r)) == ds.y[static_cast<std::size_t>(r)];
    }
    CHECK(static_cast<double>(correct) / ds.n_rows() >= 0.99);

    SUBCASE("training loss is non-increasing under this step size") {
        for (std::size_t e = 1; e < lr.loss_trace().size(); ++e) {
            CHECK(lr.loss_trace()[e] <= lr.loss_trace()[e - 1] + 1e-12);
        }
    }
}

TEST_CASE("logistic step 0 stays at uniform predictions") {
    const auto ds = random_dataset(40, 3, 4, 9);
    const auto lr = fit_logistic(ds, 5, 0.0);
    const auto dist = lr.predict_proba(ds.row(0));
    for (double p : dist.probs) CHECK(p == 0.25);
}

TEST_CASE("logistic oversized step is a numeric error") {
    const auto ds = random_dataset(30, 2, 2, 13);
    CHECK_THROWS_AS(static_cast<void>(fit_logistic(ds, 200, 1e12)), NumericError);
}

TEST_CASE("svm separable data reaches zero hinge violations") {
    Rng rng(15);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 80; ++i) {
        const int cls = 1 + (i % 2);
        rows.push_back({(cls == 1 ? -3.0 : 3.0) + rng.normal() * 0.1});
        labels.push_back(cls);
    }
    const auto ds = make_dataset(rows, labels, 2);
    const auto svm = fit_linear_svm(ds, 80, 0.05, 1e-5, 3);
    int correct = 0;
    for (int r = 0; r < ds.n_rows(); ++r) {
        correct += svm.predict(ds.row(r)) == ds.y[static_cast<std::size_t>(r)];
    }
    CHECK(correct == ds.n_rows());
    // Separable with small regularization: the averaged objective flattens
    // near zero hinge loss.
    CHECK(svm.objective_trace().back() < 0.2);
}

TEST_CASE("svm objective decreases over epochs within tolerance") {
    const auto ds = random_dataset(60, 3, 3, 19);
    const auto svm = fit_linear_svm(ds, 40, 0.005, 1e-4, 5);
    const auto& trace = svm.objective_trace();
    REQUIRE(trace.size() == 41);
    // SGD wobbles; require overall descent and bounded per-epoch increases.
    CHECK(trace.back() <= trace.front());
    for (std::size_t e = 1; e < trace.size(); ++e) CHECK(trace[e] <= trace[e - 1] + 0.05);
}

TEST_CASE("svm zero weights give uniform probabilities") {
    const auto ds = random_dataset(30, 2, 5, 23);
    // Epochs run but step 0 leaves the margins all equal.
    const auto svm = fit_linear_svm(ds, 3, 0.0, 0.0, 7);
    const auto dist = svm.predict_proba(ds.row(0));
    for (double p : dist.probs) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("baseline probability outputs sum to one") {
    const auto ds = random_dataset(50, 4, 6, 27);
    const auto nb = fit_gaussian_nb(ds);
    const auto lr = fit_logistic(ds, 50, 0.3);
    const auto svm = fit_linear_svm(ds, 20, 0.01, 1e-4, 1);
    Rng rng(2);
    for (int it = 0; it < 30; ++it) {
        std::vector<double> row;
        for (int c = 0; c < 4; ++c) row.push_back(rng.uniform() * 10);
        for (const Classifier* model : {static_cast<const Classifier*>(&nb),
                                        static_cast<const Classifier*>(&lr),
                                        static_cast<const Classifier*>(&svm)}) {
            const auto dist = model->predict_proba(row);
            double total = 0;
            for (double p : dist.probs) total += p;
            CHECK(std::fabs(total - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("baselines are deterministic under seed") {
    const auto ds = random_dataset(60, 3, 3, 37);
    const auto a = fit_linear_svm(ds, 10, 0.01, 1e-4, 11);
    const auto b = fit_linear_svm(ds, 10, 0.01, 1e-4, 11);
    CHECK(a.margins(ds.row(0)) == b.margins(ds.row(0)));
    const auto lr_a = fit_logistic(ds, 20, 0.2);
    const auto lr_b = fit_logistic(ds, 20, 0.2);
    CHECK(lr_a.weights() == lr_b.weights());
}
