#pragma once

#include "xmc/classifier.hpp"
#include "xmc/dataset.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace xmc {

// Per-feature empirical values and moments of the training data; the
// perturbation source and distance scale for local explanations.
struct TrainStats {
    std::vector<std::vector<double>> values; // observed values per feature
    std::vector<double> mean;
    std::vector<double> stddev; // population std

    static TrainStats from(const Dataset& train);
    int n_features() const { return static_cast<int>(values.size()); }
};

struct LimeConfig {
    int num_samples = 5000;
    double kernel_width = 0.0; // <= 0: default 0.75 * sqrt(n_features)
    double ridge_lambda = 1.0;
    int num_features_k = 5;
    std::uint64_t seed = 0;
};

double default_kernel_width(int n_features);

// Weighted linear surrogate around one instance, raw feature scale.
struct LocalSurrogate {
    std::vector<double> weights;
    double intercept = 0.0;
    int target_class = 0; // 0-based class index explained
};

struct LimeExplanation {
    LocalSurrogate surrogate;
    std::vector<std::pair<int, double>> top_features; // (feature, signed weight), |w| desc
    double local_r2 = 0.0;
    int predicted_label = 0;      // 1-based, argmax of the black box at the instance
    double top1_probability = 0.0;
    int true_label = -1; // set by callers that explain labeled rows; -1 = unknown
};

struct SoundnessScore {
    std::vector<double> per_instance_r2;
    double mean_r2 = 0.0;
};

// n rows around `instance`; each feature independently keeps the instance
// value (p = 0.5) or resamples uniformly from the observed training values.
// Row 0 is the unmodified instance.
std::vector<std::vector<double>> perturb(std::span<const double> instance,
                                         const TrainStats& stats, int n, std::uint64_t seed);

// exp(-d^2 / width^2) on std-standardized Euclidean distance; zero-variance
// features contribute nothing.
std::vector<double> proximity_weights(const std::vector<std::vector<double>>& samples,
                                      std::span<const double> instance, const TrainStats& stats,
                                      double kernel_width);

// Exact weighted ridge via the normal equations on standardized features,
// intercept unpenalized, coefficients mapped back to raw scale.
LocalSurrogate fit_local_surrogate(const std::vector<std::vector<double>>& samples,
                                   std::span<const double> black_box_probs,
                                   std::span<const double> weights, double ridge_lambda,
                                   const TrainStats& stats, int target_class);

// Weighted R^2 of predictions vs targets: 1 - sum w (y - yhat)^2 / sum w (y - ybar)^2
// with the weighted mean ybar; defined as 0 when the targets carry no
// variance.
double weighted_r2(std::span<const double> y, std::span<const double> y_hat,
                   std::span<const double> w);

LimeExplanation explain_instance(const Classifier& model, std::span<const double> instance,
                                 const LimeConfig& config, const TrainStats& stats);

// Mean local R^2 over all test instances; per-instance seeds derive from
// (config.seed, row index).
SoundnessScore soundness_r2(const Classifier& model, const Dataset& test_set,
                            const LimeConfig& config, const TrainStats& stats,
                            int n_threads = 0);

} // namespace xmc
