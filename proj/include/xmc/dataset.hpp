#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace xmc {

enum class FeatureKind { numeric, one_hot };

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    std::string source_question; // question id; equals name for numeric features
};

// Ordered feature list. Names are unique; indicator columns of one question
// (e.g. Q4_1..Q4_7) form a contiguous group ordered by option index.
class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<Feature> features);

    // Builds a schema from column names. Names of the form <question>_<k>
    // become a one-hot group for <question>; everything else is numeric.
    static FeatureSchema from_names(const std::vector<std::string>& names);

    int size() const { return static_cast<int>(features_.size()); }
    const Feature& at(int i) const { return features_[static_cast<std::size_t>(i)]; }
    const std::vector<Feature>& features() const { return features_; }
    std::vector<std::string> names() const;
    int index_of(const std::string& name) const; // -1 when absent

private:
    void validate() const;

    std::vector<Feature> features_;
    std::unordered_map<std::string, int> index_;
};

// Labeled feature matrix. Labels are 1-based wave ids in [1, n_classes].
// Missing values are NaN and only appear between concatenation and
// imputation. Immutable by convention once built; safe for shared reads.
struct Dataset {
    FeatureSchema schema;
    std::vector<double> x; // row-major, n_rows x n_features
    std::vector<int> y;
    int n_classes = 0;

    int n_rows() const { return static_cast<int>(y.size()); }
    int n_features() const { return schema.size(); }

    std::span<const double> row(int i) const {
        return {x.data() + static_cast<std::size_t>(i) * schema.size(),
                static_cast<std::size_t>(schema.size())};
    }
    double at(int i, int j) const {
        return x[static_cast<std::size_t>(i) * schema.size() + static_cast<std::size_t>(j)];
    }
    double& at(int i, int j) {
        return x[static_cast<std::size_t>(i) * schema.size() + static_cast<std::size_t>(j)];
    }

    bool has_missing() const;
    std::vector<int> class_counts() const; // index k holds count of label k+1

    // Row subset, original order preserved.
    Dataset select_rows(std::span<const int> rows) const;
    // Column subset by schema index, given order preserved.
    Dataset select_columns(std::span<const int> cols) const;
};

inline constexpr const char* kLabelColumn = "hWave";

// Canonical dataset file: feature header + label column `hWave`, one row per
// instance, empty cell = missing.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& ds, const std::string& path);

} // namespace xmc
