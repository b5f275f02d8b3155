#include "xmc/lime.hpp"

#include "xmc/errors.hpp"
#include "xmc/parallel.hpp"
#include "xmc/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace xmc {

TrainStats TrainStats::from(const Dataset& train) {
    const int d = train.n_features();
    const int n = train.n_rows();
    if (n == 0) throw DataError("TrainStats: empty training set");
    TrainStats stats;
    stats.values.assign(static_cast<std::size_t>(d), {});
    stats.mean.assign(static_cast<std::size_t>(d), 0.0);
    stats.stddev.assign(static_cast<std::size_t>(d), 0.0);
    for (int c = 0; c < d; ++c) {
        auto& col = stats.values[static_cast<std::size_t>(c)];
        col.reserve(static_cast<std::size_t>(n));
        double sum = 0;
        for (int r = 0; r < n; ++r) {
            const double v = train.at(r, c);
            col.push_back(v);
            sum += v;
        }
        const double mean = sum / n;
        double sq = 0;
        for (double v : col) sq += (v - mean) * (v - mean);
        stats.mean[static_cast<std::size_t>(c)] = mean;
        stats.stddev[static_cast<std::size_t>(c)] = std::sqrt(sq / n);
    }
    return stats;
}

double default_kernel_width(int n_features) { return 0.75 * std::sqrt(n_features); }

std::vector<std::vector<double>> perturb(std::span<const double> instance,
                                         const TrainStats& stats, int n, std::uint64_t seed) {
    if (n < 1) throw DataError("perturb: n must be >= 1");
    if (stats.n_features() == 0 || stats.values[0].empty()) {
        throw DataError("perturb: empty training stats");
    }
    const auto d = instance.size();
    std::vector<std::vector<double>> samples;
    samples.reserve(static_cast<std::size_t>(n));
    samples.emplace_back(instance.begin(), instance.end());

    Rng rng(seed);
    for (int i = 1; i < n; ++i) {
        std::vector<double> row(instance.begin(), instance.end());
        for (std::size_t c = 0; c < d; ++c) {
            if (rng.bernoulli(0.5)) continue;
            const auto& col = stats.values[c];
            row[c] = col[rng.uniform_int(col.size())];
        }
        samples.push_back(std::move(row));
    }
    return samples;
}

std::vector<double> proximity_weights(const std::vector<std::vector<double>>& samples,
                                      std::span<const double> instance, const TrainStats& stats,
                                      double kernel_width) {
    if (!(kernel_width > 0)) throw DataError("proximity_weights: kernel_width must be > 0");
    std::vector<double> weights;
    weights.reserve(samples.size());
    const double inv_w2 = 1.0 / (kernel_width * kernel_width);
    for (const auto& s : samples) {
        double d2 = 0;
        for (std::size_t c = 0; c < instance.size(); ++c) {
            const double sd = stats.stddev[c];
            if (sd <= 0) continue;
            const double dv = (s[c] - instance[c]) / sd;
            d2 += dv * dv;
        }
        weights.push_back(std::exp(-d2 * inv_w2));
    }
    return weights;
}

LocalSurrogate fit_local_surrogate(const std::vector<std::vector<double>>& samples,
                                   std::span<const double> black_box_probs,
                                   std::span<const double> weights, double ridge_lambda,
                                   const TrainStats& stats, int target_class) {
    const auto n = samples.size();
    if (black_box_probs.size() != n || weights.size() != n) {
        throw DataError("fit_local_surrogate: length mismatch");
    }
    std::size_t positive = 0;
    for (double w : weights) positive += w > 0;
    if (positive < 2) throw DataError("fit_local_surrogate: need >= 2 positively weighted samples");
    if (ridge_lambda < 0) throw DataError("fit_local_surrogate: negative ridge_lambda");

    const auto d = static_cast<Eigen::Index>(stats.n_features());
    const auto ni = static_cast<Eigen::Index>(n);

    // Design matrix on standardized features with a trailing intercept column.
    Eigen::MatrixXd z(ni, d + 1);
    for (Eigen::Index i = 0; i < ni; ++i) {
        const auto& row = samples[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < d; ++c) {
            const double sd = stats.stddev[static_cast<std::size_t>(c)];
            z(i, c) = sd > 0 ? (row[static_cast<std::size_t>(c)] -
                                stats.mean[static_cast<std::size_t>(c)]) /
                                   sd
                             : 0.0;
        }
        z(i, d) = 1.0;
    }
    Eigen::VectorXd y(ni), w(ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        y(i) = black_box_probs[static_cast<std::size_t>(i)];
        w(i) = weights[static_cast<std::size_t>(i)];
    }

    Eigen::MatrixXd a = z.transpose() * w.asDiagonal() * z;
    for (Eigen::Index c = 0; c < d; ++c) a(c, c) += ridge_lambda; // intercept unpenalized
    const Eigen::VectorXd b = z.transpose() * (w.asDiagonal() * y);
    const Eigen::LDLT<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success) {
        throw NumericError("fit_local_surrogate: normal equations not solvable");
    }
    const Eigen::VectorXd beta = solver.solve(b);
    if (!beta.allFinite()) {
        throw NumericError("fit_local_surrogate: singular system (add ridge_lambda)");
    }

    LocalSurrogate g;
    g.target_class = target_class;
    g.weights.assign(static_cast<std::size_t>(d), 0.0);
    double intercept = beta(d);
    for (Eigen::Index c = 0; c < d; ++c) {
        const double sd = stats.stddev[static_cast<std::size_t>(c)];
        if (sd > 0) {
            const double raw = beta(c) / sd;
            g.weights[static_cast<std::size_t>(c)] = raw;
            intercept -= raw * stats.mean[static_cast<std::size_t>(c)];
        }
    }
    g.intercept = intercept;
    return g;
}

double weighted_r2(std::span<const double> y, std::span<const double> y_hat,
                   std::span<const double> w) {
    if (y.size() != y_hat.size() || y.size() != w.size()) {
        throw DataError("weighted_r2: length mismatch");
    }
    double w_total = 0, y_mean = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        w_total += w[i];
        y_mean += w[i] * y[i];
    }
    if (w_total <= 0) throw DataError("weighted_r2: zero total weight");
    y_mean /= w_total;
    // Constant targets are an uninformative explanation, scored 0 by
    // definition (the FP residue of y - mean(y) must not blow up the ratio).
    const auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
    if (*y_min == *y_max) return 0.0;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += w[i] * (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        ss_tot += w[i] * (y[i] - y_mean) * (y[i] - y_mean);
    }
    if (ss_tot <= 0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

namespace {

double surrogate_value(const LocalSurrogate& g, std::span<const double> row) {
    double v = g.intercept;
    for (std::size_t c = 0; c < g.weights.size(); ++c) v += g.weights[c] * row[c];
    return v;
}

} // namespace

LimeExplanation explain_instance(const Classifier& model, std::span<const double> instance,
                                 const LimeConfig& config, const TrainStats& stats) {
    if (static_cast<int>(instance.size()) != stats.n_features()) {
        throw DataError("explain_instance: instance width mismatch");
    }
    if (config.num_samples < 10) throw DataError("explain_instance: num_samples must be >= 10");
    if (config.num_features_k < 1 ||
        config.num_features_k > stats.n_features()) {
        throw DataError("explain_instance: num_features_k outside [1, n_features]");
    }
    const double width =
        config.kernel_width > 0 ? config.kernel_width : default_kernel_width(stats.n_features());

    const ClassDistribution at_instance = model.predict_proba(instance);
    const int target = at_instance.argmax();

    const auto samples = perturb(instance, stats, config.num_samples, config.seed);
    std::vector<double> probs;
    probs.reserve(samples.size());
    for (const auto& s : samples) {
        probs.push_back(model.predict_proba(s).probs[static_cast<std::size_t>(target)]);
    }
    const auto weights = proximity_weights(samples, instance, stats, width);

    LimeExplanation expl;
    expl.surrogate =
        fit_local_surrogate(samples, probs, weights, config.ridge_lambda, stats, target);
    expl.predicted_label = target + 1;
    expl.top1_probability = at_instance.probs[static_cast<std::size_t>(target)];

    std::vector<double> fitted;
    fitted.reserve(samples.size());
    for (const auto& s : samples) fitted.push_back(surrogate_value(expl.surrogate, s));
    expl.local_r2 = weighted_r2(probs, fitted, weights);

    std::vector<int> order(expl.surrogate.weights.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double wa = std::fabs(expl.surrogate.weights[static_cast<std::size_t>(a)]);
        const double wb = std::fabs(expl.surrogate.weights[static_cast<std::size_t>(b)]);
        if (wa != wb) return wa > wb;
        return a < b;
    });
    for (int i = 0; i < config.num_features_k; ++i) {
        const int f = order[static_cast<std::size_t>(i)];
        expl.top_features.emplace_back(f, expl.surrogate.weights[static_cast<std::size_t>(f)]);
    }
    return expl;
}

SoundnessScore soundness_r2(const Classifier& model, const Dataset& test_set,
                            const LimeConfig& config, const TrainStats& stats, int n_threads) {
    if (test_set.n_rows() == 0) throw DataError("soundness_r2: empty test set");
    SoundnessScore score;
    score.per_instance_r2.assign(static_cast<std::size_t>(test_set.n_rows()), 0.0);
    parallel_for(
        test_set.n_rows(),
        [&](int r) {
            LimeConfig local = config;
            local.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
            const auto expl = explain_instance(model, test_set.row(r), local, stats);
            score.per_instance_r2[static_cast<std::size_t>(r)] = expl.local_r2;
        },
        n_threads);
    double total = 0;
    for (double r2 : score.per_instance_r2) total += r2;
    score.mean_r2 = total / static_cast<double>(score.per_instance_r2.size());
    return score;
}

} // namespace xmc
