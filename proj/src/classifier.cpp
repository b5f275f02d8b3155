#include "xmc/classifier.hpp"

#include "xmc/errors.hpp"

namespace xmc {

int ClassDistribution::argmax() const {
    int best = 0;
    for (int k = 1; k < n_classes(); ++k) {
        if (probs[static_cast<std::size_t>(k)] > probs[static_cast<std::size_t>(best)]) best = k;
    }
    return best;
}

std::vector<int> Classifier::predict_all(const Dataset& ds) const {
    std::vector<int> preds;
    preds.reserve(static_cast<std::size_t>(ds.n_rows()));
    for (int r = 0; r < ds.n_rows(); ++r) preds.push_back(predict(ds.row(r)));
    return preds;
}

void Classifier::check_width(std::span<const double> row) const {
    if (static_cast<int>(row.size()) != n_features()) {
        throw DataError("row width " + std::to_string(row.size()) + " != model feature count " +
                        std::to_string(n_features()));
    }
}

} // namespace xmc
