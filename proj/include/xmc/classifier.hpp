#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xmc/dataset.hpp"

namespace xmc {

// Per-class probabilities; each in [0,1], summing to 1 within 1e-9.
struct ClassDistribution {
    std::vector<double> probs;

    int n_classes() const { return static_cast<int>(probs.size()); }
    // Ties broken by lowest class index.
    int argmax() const;
    double max_prob() const { return probs[static_cast<std::size_t>(argmax())]; }
};

// Black-box prediction surface shared by all models; fitted models are
// immutable and safe for concurrent prediction.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual std::string kind() const = 0;
    virtual int n_classes() const = 0;
    virtual int n_features() const = 0;
    virtual ClassDistribution predict_proba(std::span<const double> row) const = 0;

    // Predicted 1-based label (argmax class index + 1).
    int predict(std::span<const double> row) const { return predict_proba(row).argmax() + 1; }

    std::vector<int> predict_all(const Dataset& ds) const;

protected:
    void check_width(std::span<const double> row) const;
};

} // namespace xmc
