#include "xmc/baselines.hpp"

#include "xmc/errors.hpp"
#include "xmc/rng.hpp"
#include "xmc/tree.hpp" // softmax

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xmc {

Standardizer Standardizer::fit(const Dataset& ds) {
    const int d = ds.n_features();
    const int n = ds.n_rows();
    Standardizer s;
    s.mean.assign(static_cast<std::size_t>(d), 0.0);
    s.stddev.assign(static_cast<std::size_t>(d), 0.0);
    for (int c = 0; c < d; ++c) {
        double sum = 0;
        for (int r = 0; r < n; ++r) sum += ds.at(r, c);
        const double mean = sum / n;
        double sq = 0;
        for (int r = 0; r < n; ++r) {
            const double dv = ds.at(r, c) - mean;
            sq += dv * dv;
        }
        s.mean[static_cast<std::size_t>(c)] = mean;
        s.stddev[static_cast<std::size_t>(c)] = std::sqrt(sq / n);
    }
    return s;
}

void Standardizer::apply(std::span<const double> row, std::vector<double>& out) const {
    out.resize(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
        const double sd = stddev[c];
        out[c] = sd > 0 ? (row[c] - mean[c]) / sd : 0.0;
    }
}

namespace {

// Standardized design matrix, row-major.
std::vector<double> standardized_matrix(const Dataset& ds, const Standardizer& s) {
    std::vector<double> z(static_cast<std::size_t>(ds.n_rows()) *
                          static_cast<std::size_t>(ds.n_features()));
    std::vector<double> buf;
    for (int r = 0; r < ds.n_rows(); ++r) {
        s.apply(ds.row(r), buf);
        std::copy(buf.begin(), buf.end(),
                  z.begin() + static_cast<std::size_t>(r) * ds.n_features());
    }
    return z;
}

} // namespace

GaussianNbModel fit_gaussian_nb(const Dataset& train, double var_floor) {
    if (train.n_rows() == 0) throw DataError("fit_gaussian_nb: empty training set");
    const int d = train.n_features();
    const int K = train.n_classes;
    const int n = train.n_rows();

    GaussianNbModel model;
    model.n_classes_ = K;
    model.n_features_ = d;
    model.priors_.assign(static_cast<std::size_t>(K), 0.0);
    model.mean_.assign(static_cast<std::size_t>(K),
                       std::vector<double>(static_cast<std::size_t>(d), 0.0));
    model.var_.assign(static_cast<std::size_t>(K),
                      std::vector<double>(static_cast<std::size_t>(d), 0.0));

    const auto counts = train.class_counts();
    for (int k = 0; k < K; ++k) {
        model.priors_[static_cast<std::size_t>(k)] =
            static_cast<double>(counts[static_cast<std::size_t>(k)]) / n;
    }
    for (int r = 0; r < n; ++r) {
        const auto k = static_cast<std::size_t>(train.y[static_cast<std::size_t>(r)] - 1);
        for (int c = 0; c < d; ++c) model.mean_[k][static_cast<std::size_t>(c)] += train.at(r, c);
    }
    for (int k = 0; k < K; ++k) {
        const double ck = counts[static_cast<std::size_t>(k)];
        if (ck == 0) continue;
        for (auto& m : model.mean_[static_cast<std::size_t>(k)]) m /= ck;
    }
    for (int r = 0; r < n; ++r) {
        const auto k = static_cast<std::size_t>(train.y[static_cast<std::size_t>(r)] - 1);
        for (int c = 0; c < d; ++c) {
            const double dv = train.at(r, c) - model.mean_[k][static_cast<std::size_t>(c)];
            model.var_[k][static_cast<std::size_t>(c)] += dv * dv;
        }
    }
    for (int k = 0; k < K; ++k) {
        const double ck = counts[static_cast<std::size_t>(k)];
        for (auto& v : model.var_[static_cast<std::size_t>(k)]) {
            v = ck > 0 ? std::max(v / ck, var_floor) : 1.0;
        }
    }
    return model;
}

ClassDistribution GaussianNbModel::predict_proba(std::span<const double> row) const {
    check_width(row);
    std::vector<double> log_post(static_cast<std::size_t>(n_classes_));
    constexpr double log_2pi = 1.8378770664093454836;
    for (int k = 0; k < n_classes_; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        double lp = priors_[ku] > 0 ? std::log(priors_[ku]) : -1e30;
        for (int c = 0; c < n_features_; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            const double var = var_[ku][cu];
            const double dv = row[cu] - mean_[ku][cu];
            lp += -0.5 * (log_2pi + std::log(var)) - dv * dv / (2.0 * var);
        }
        log_post[ku] = lp;
    }
    return ClassDistribution{softmax(log_post)};
}

double logistic_loss_grad(std::span<const double> params, const std::vector<double>& z,
                          std::span<const int> labels, int n_classes, int n_features,
                          std::vector<double>* grad) {
    const auto n = static_cast<int>(labels.size());
    const int K = n_classes;
    const int d = n_features;
    if (grad) grad->assign(params.size(), 0.0);

    double loss = 0;
    std::vector<double> scores(static_cast<std::size_t>(K));
    for (int i = 0; i < n; ++i) {
        const double* zi = z.data() + static_cast<std::size_t>(i) * d;
        for (int k = 0; k < K; ++k) {
            const double* wk = params.data() + static_cast<std::size_t>(k) * d;
            double s = params[static_cast<std::size_t>(K) * d + static_cast<std::size_t>(k)];
            for (int c = 0; c < d; ++c) s += wk[c] * zi[c];
            scores[static_cast<std::size_t>(k)] = s;
        }
        const auto probs = softmax(scores);
        const auto yk = static_cast<std::size_t>(labels[i] - 1);
        // No clamp: a fully underflowed true-class probability is divergence
        // and must surface as a non-finite loss.
        loss += -std::log(probs[yk]);
        if (grad) {
            for (int k = 0; k < K; ++k) {
                const double delta =
                    (probs[static_cast<std::size_t>(k)] - (static_cast<std::size_t>(k) == yk)) / n;
                double* gk = grad->data() + static_cast<std::size_t>(k) * d;
                for (int c = 0; c < d; ++c) gk[c] += delta * zi[c];
                (*grad)[static_cast<std::size_t>(K) * d + static_cast<std::size_t>(k)] += delta;
            }
        }
    }
    return loss / n;
}

LogisticModel fit_logistic(const Dataset& train, int epochs, double step, std::uint64_t seed) {
    if (train.n_rows() == 0) throw DataError("fit_logistic: empty training set");
    if (epochs < 1) throw DataError("fit_logistic: epochs must be >= 1");
    (void)seed; // full-batch descent from zero weights has no random state

    const int d = train.n_features();
    const int K = train.n_classes;
    LogisticModel model;
    model.n_classes_ = K;
    model.n_features_ = d;
    model.standardizer_ = Standardizer::fit(train);
    const auto z = standardized_matrix(train, model.standardizer_);

    std::vector<double> params(static_cast<std::size_t>(K) * d + static_cast<std::size_t>(K), 0.0);
    std::vector<double> grad;
    model.loss_trace_.reserve(static_cast<std::size_t>(epochs));
    for (int e = 0; e < epochs; ++e) {
        const double loss = logistic_loss_grad(params, z, train.y, K, d, &grad);
        if (!std::isfinite(loss)) throw NumericError("fit_logistic: non-finite loss (reduce step)");
        model.loss_trace_.push_back(loss);
        for (std::size_t j = 0; j < params.size(); ++j) params[j] -= step * grad[j];
    }
    model.weights_.assign(params.begin(), params.begin() + static_cast<std::size_t>(K) * d);
    model.bias_.assign(params.begin() + static_cast<std::size_t>(K) * d, params.end());
    for (double w : model.weights_) {
        if (!std::isfinite(w)) throw NumericError("fit_logistic: non-finite weights");
    }
    return model;
}

ClassDistribution LogisticModel::predict_proba(std::span<const double> row) const {
    check_width(row);
    std::vector<double> zrow;
    standardizer_.apply(row, zrow);
    std::vector<double> scores(static_cast<std::size_t>(n_classes_));
    for (int k = 0; k < n_classes_; ++k) {
        const double* wk = weights_.data() + static_cast<std::size_t>(k) * n_features_;
        double s = bias_[static_cast<std::size_t>(k)];
        for (int c = 0; c < n_features_; ++c) s += wk[c] * zrow[static_cast<std::size_t>(c)];
        scores[static_cast<std::size_t>(k)] = s;
    }
    return ClassDistribution{softmax(scores)};
}

double svm_objective(std::span<const double> weights, std::span<const double> bias,
                     const std::vector<double>& z, std::span<const int> labels, int n_classes,
                     int n_features, double reg) {
    const auto n = static_cast<int>(labels.size());
    double hinge = 0;
    for (int i = 0; i < n; ++i) {
        const double* zi = z.data() + static_cast<std::size_t>(i) * n_features;
        for (int k = 0; k < n_classes; ++k) {
            const double* wk = weights.data() + static_cast<std::size_t>(k) * n_features;
            double m = bias[static_cast<std::size_t>(k)];
            for (int c = 0; c < n_features; ++c) m += wk[c] * zi[c];
            const double t = labels[i] - 1 == k ? 1.0 : -1.0;
            hinge += std::max(0.0, 1.0 - t * m);
        }
    }
    double w_sq = 0;
    for (double w : weights) w_sq += w * w;
    return hinge / n + reg * w_sq;
}

LinearSvmModel fit_linear_svm(const Dataset& train, int epochs, double step, double reg,
                              std::uint64_t seed) {
    if (train.n_rows() == 0) throw DataError("fit_linear_svm: empty training set");
    if (epochs < 1) throw DataError("fit_linear_svm: epochs must be >= 1");

    const int d = train.n_features();
    const int K = train.n_classes;
    const int n = train.n_rows();
    LinearSvmModel model;
    model.n_classes_ = K;
    model.n_features_ = d;
    model.standardizer_ = Standardizer::fit(train);
    const auto z = standardized_matrix(train, model.standardizer_);

    model.weights_.assign(static_cast<std::size_t>(K) * d, 0.0);
    model.bias_.assign(static_cast<std::size_t>(K), 0.0);
    model.objective_trace_.reserve(static_cast<std::size_t>(epochs) + 1);
    model.objective_trace_.push_back(
        svm_objective(model.weights_, model.bias_, z, train.y, K, d, reg));

    Rng rng(seed);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        for (int i : order) {
            const double* zi = z.data() + static_cast<std::size_t>(i) * d;
            for (int k = 0; k < K; ++k) {
                double* wk = model.weights_.data() + static_cast<std::size_t>(k) * d;
                double m = model.bias_[static_cast<std::size_t>(k)];
                for (int c = 0; c < d; ++c) m += wk[c] * zi[c];
                const double t = train.y[static_cast<std::size_t>(i)] - 1 == k ? 1.0 : -1.0;
                const bool violated = t * m < 1.0;
                for (int c = 0; c < d; ++c) {
                    double g = 2.0 * reg * wk[c];
                    if (violated) g -= t * zi[c];
                    wk[c] -= step * g;
                }
                if (violated) model.bias_[static_cast<std::size_t>(k)] += step * t;
            }
        }
        const double obj = svm_objective(model.weights_, model.bias_, z, train.y, K, d, reg);
        if (!std::isfinite(obj)) throw NumericError("fit_linear_svm: non-finite objective");
        model.objective_trace_.push_back(obj);
    }
    return model;
}

std::vector<double> LinearSvmModel::margins(std::span<const double> row) const {
    std::vector<double> zrow;
    standardizer_.apply(row, zrow);
    std::vector<double> out(static_cast<std::size_t>(n_classes_));
    for (int k = 0; k < n_classes_; ++k) {
        const double* wk = weights_.data() + static_cast<std::size_t>(k) * n_features_;
        double m = bias_[static_cast<std::size_t>(k)];
        for (int c = 0; c < n_features_; ++c) m += wk[c] * zrow[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(k)] = m;
    }
    return out;
}

ClassDistribution LinearSvmModel::predict_proba(std::span<const double> row) const {
    check_width(row);
    auto m = margins(row);
    for (auto& v : m) v /= temperature_;
    return ClassDistribution{softmax(m)};
}

} // namespace xmc
