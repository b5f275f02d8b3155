#pragma once

#include "xmc/classifier.hpp"
#include "xmc/dataset.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace xmc {

// Train-time feature standardization carried inside the linear models.
// Zero-variance features map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev; // population std; 0 kept as-is, handled at apply

    static Standardizer fit(const Dataset& ds);
    void apply(std::span<const double> row, std::vector<double>& out) const;
};

class GaussianNbModel : public Classifier {
public:
    std::string kind() const override { return "nb"; }
    int n_classes() const override { return n_classes_; }
    int n_features() const override { return n_features_; }
    ClassDistribution predict_proba(std::span<const double> row) const override;

    const std::vector<double>& priors() const { return priors_; }
    const std::vector<std::vector<double>>& means() const { return mean_; }
    const std::vector<std::vector<double>>& variances() const { return var_; }

    friend GaussianNbModel fit_gaussian_nb(const Dataset& train, double var_floor);
    friend struct BaselineCodec;

private:
    std::vector<double> priors_;
    std::vector<std::vector<double>> mean_; // [class][feature]
    std::vector<std::vector<double>> var_;
    int n_classes_ = 0;
    int n_features_ = 0;
};

// Closed-form per-class Gaussians; the variance floor keeps one-hot columns
// that are constant within a class usable.
GaussianNbModel fit_gaussian_nb(const Dataset& train, double var_floor = 1e-9);

class LogisticModel : public Classifier {
public:
    std::string kind() const override { return "lr"; }
    int n_classes() const override { return n_classes_; }
    int n_features() const override { return n_features_; }
    ClassDistribution predict_proba(std::span<const double> row) const override;

    const std::vector<double>& weights() const { return weights_; } // [class*d + feature]
    const std::vector<double>& bias() const { return bias_; }
    const std::vector<double>& loss_trace() const { return loss_trace_; }
    const Standardizer& standardizer() const { return standardizer_; }

    friend LogisticModel fit_logistic(const Dataset& train, int epochs, double step,
                                      std::uint64_t seed);
    friend struct BaselineCodec;

private:
    std::vector<double> weights_;
    std::vector<double> bias_;
    std::vector<double> loss_trace_;
    Standardizer standardizer_;
    int n_classes_ = 0;
    int n_features_ = 0;
};

// Full-batch gradient descent on multinomial cross-entropy from zero weights
// over standardized features. Throws NumericError if the loss leaves the
// finite range (step too large).
LogisticModel fit_logistic(const Dataset& train, int epochs, double step, std::uint64_t seed = 0);

// Mean cross-entropy and its gradient at the given flat parameters
// [W(K x d) | b(K)], over standardized rows Z. Shared by the trainer and the
// finite-difference checks.
double logistic_loss_grad(std::span<const double> params, const std::vector<double>& z,
                          std::span<const int> labels, int n_classes, int n_features,
                          std::vector<double>* grad);

class LinearSvmModel : public Classifier {
public:
    std::string kind() const override { return "svm"; }
    int n_classes() const override { return n_classes_; }
    int n_features() const override { return n_features_; }
    ClassDistribution predict_proba(std::span<const double> row) const override;

    std::vector<double> margins(std::span<const double> row) const;
    const std::vector<double>& objective_trace() const { return objective_trace_; }
    const Standardizer& standardizer() const { return standardizer_; }

    friend LinearSvmModel fit_linear_svm(const Dataset& train, int epochs, double step, double reg,
                                         std::uint64_t seed);
    friend struct BaselineCodec;

private:
    std::vector<double> weights_; // [class*d + feature]
    std::vector<double> bias_;
    std::vector<double> objective_trace_;
    Standardizer standardizer_;
    double temperature_ = 1.0;
    int n_classes_ = 0;
    int n_features_ = 0;
};

// One-vs-rest hinge-loss SGD with L2 regularization; probabilities are the
// softmax of margins at temperature 1.
LinearSvmModel fit_linear_svm(const Dataset& train, int epochs, double step, double reg,
                              std::uint64_t seed);

// Mean hinge loss plus reg * ||W||^2 at the given parameters.
double svm_objective(std::span<const double> weights, std::span<const double> bias,
                     const std::vector<double>& z, std::span<const int> labels, int n_classes,
                     int n_features, double reg);

} // namespace xmc
