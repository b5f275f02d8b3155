#include "xmc/dataset.hpp"

#include "xmc/csv.hpp"
#include "xmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace xmc {

namespace {

// Splits "Q4_3" into ("Q4", 3); returns false for names without a numeric
// option suffix.
bool split_option_suffix(const std::string& name, std::string& question, int& option) {
    const auto pos = name.rfind('_');
    if (pos == std::string::npos || pos == 0 || pos + 1 >= name.size()) return false;
    for (std::size_t i = pos + 1; i < name.size(); ++i) {
        if (name[i] < '0' || name[i] > '9') return false;
    }
    question = name.substr(0, pos);
    option = std::stoi(name.substr(pos + 1));
    return true;
}

} // namespace

FeatureSchema::FeatureSchema(std::vector<Feature> features) : features_(std::move(features)) {
    for (int i = 0; i < size(); ++i) index_[features_[static_cast<std::size_t>(i)].name] = i;
    validate();
}

void FeatureSchema::validate() const {
    if (index_.size() != features_.size()) throw DataError("schema: duplicate feature names");
    // One-hot groups must be contiguous and ordered by option index.
    for (std::size_t i = 0; i + 1 < features_.size(); ++i) {
        const auto& a = features_[i];
        if (a.kind != FeatureKind::one_hot) continue;
        for (std::size_t j = i + 1; j < features_.size(); ++j) {
            const auto& b = features_[j];
            if (b.kind == FeatureKind::one_hot && b.source_question == a.source_question &&
                features_[j - 1].source_question != a.source_question) {
                throw DataError("schema: one-hot group '" + a.source_question +
                                "' is not contiguous");
            }
        }
    }
    for (std::size_t i = 1; i < features_.size(); ++i) {
        const auto& prev = features_[i - 1];
        const auto& cur = features_[i];
        if (prev.kind == FeatureKind::one_hot && cur.kind == FeatureKind::one_hot &&
            prev.source_question == cur.source_question) {
            std::string q;
            int a = 0, b = 0;
            if (split_option_suffix(prev.name, q, a) && split_option_suffix(cur.name, q, b) &&
                b < a) {
                throw DataError("schema: one-hot group '" + cur.source_question +
                                "' not in option order");
            }
        }
    }
}

FeatureSchema FeatureSchema::from_names(const std::vector<std::string>& names) {
    // Collect group members per question, keyed by first appearance.
    std::vector<Feature> features;
    std::map<std::string, std::vector<std::pair<int, std::string>>> groups;
    std::vector<std::string> order; // question/feature per slot, first appearance
    std::vector<bool> grouped;
    for (const auto& name : names) {
        std::string q;
        int opt = 0;
        if (split_option_suffix(name, q, opt)) {
            auto& members = groups[q];
            if (members.empty()) {
                order.push_back(q);
                grouped.push_back(true);
            }
            members.emplace_back(opt, name);
        } else {
            order.push_back(name);
            grouped.push_back(false);
        }
    }
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
        if (!grouped[slot]) {
            features.push_back({order[slot], FeatureKind::numeric, order[slot]});
            continue;
        }
        auto members = groups[order[slot]];
        std::sort(members.begin(), members.end());
        for (const auto& [opt, name] : members) {
            features.push_back({name, FeatureKind::one_hot, order[slot]});
        }
    }
    return FeatureSchema(std::move(features));
}

std::vector<std::string> FeatureSchema::names() const {
    std::vector<std::string> out;
    out.reserve(features_.size());
    for (const auto& f : features_) out.push_back(f.name);
    return out;
}

int FeatureSchema::index_of(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

bool Dataset::has_missing() const {
    return std::any_of(x.begin(), x.end(), [](double v) { return std::isnan(v); });
}

std::vector<int> Dataset::class_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int label : y) {
        if (label < 1 || label > n_classes) {
            throw DataError("label " + std::to_string(label) + " outside [1, " +
                            std::to_string(n_classes) + "]");
        }
        ++counts[static_cast<std::size_t>(label - 1)];
    }
    return counts;
}

Dataset Dataset::select_rows(std::span<const int> rows) const {
    Dataset out;
    out.schema = schema;
    out.n_classes = n_classes;
    out.x.reserve(rows.size() * static_cast<std::size_t>(n_features()));
    out.y.reserve(rows.size());
    for (int r : rows) {
        auto src = row(r);
        out.x.insert(out.x.end(), src.begin(), src.end());
        out.y.push_back(y[static_cast<std::size_t>(r)]);
    }
    return out;
}

Dataset Dataset::select_columns(std::span<const int> cols) const {
    std::vector<Feature> feats;
    feats.reserve(cols.size());
    for (int c : cols) feats.push_back(schema.at(c));
    Dataset out;
    out.schema = FeatureSchema(std::move(feats));
    out.n_classes = n_classes;
    out.y = y;
    out.x.reserve(static_cast<std::size_t>(n_rows()) * cols.size());
    for (int r = 0; r < n_rows(); ++r) {
        for (int c : cols) out.x.push_back(at(r, c));
    }
    return out;
}

Dataset read_dataset_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    int label_col = -1;
    std::vector<std::string> feature_names;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == kLabelColumn) label_col = static_cast<int>(i);
        else feature_names.push_back(table.header[i]);
    }
    if (label_col < 0) throw DataError(path + ": no '" + std::string(kLabelColumn) + "' column");

    Dataset ds;
    ds.schema = FeatureSchema::from_names(feature_names);
    const int d = ds.schema.size();
    ds.x.reserve(table.rows.size() * static_cast<std::size_t>(d));
    ds.y.reserve(table.rows.size());
    std::vector<double> row(static_cast<std::size_t>(d));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        double label = 0;
        if (!parse_number(cells[static_cast<std::size_t>(label_col)], label) ||
            label != std::floor(label) || label < 1) {
            throw DataError(path + " row " + std::to_string(r + 2) + ": bad label");
        }
        for (std::size_t c = 0, j = 0; c < cells.size(); ++c) {
            if (static_cast<int>(c) == label_col) continue;
            const std::string& cell = cells[c];
            double v = std::nan("");
            if (!cell.empty() && cell != "NA" && !parse_number(cell, v)) {
                throw DataError(path + " row " + std::to_string(r + 2) + ": non-numeric cell '" +
                                cell + "' in column " + table.header[c]);
            }
            // Column order in the file may differ from schema order after
            // one-hot grouping; map by name.
            const int idx = ds.schema.index_of(table.header[c]);
            row[static_cast<std::size_t>(idx)] = v;
            ++j;
        }
        ds.x.insert(ds.x.end(), row.begin(), row.end());
        ds.y.push_back(static_cast<int>(label));
    }
    ds.n_classes = 0;
    for (int label : ds.y) ds.n_classes = std::max(ds.n_classes, label);
    return ds;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    CsvTable table;
    table.header = ds.schema.names();
    table.header.push_back(kLabelColumn);
    table.rows.reserve(static_cast<std::size_t>(ds.n_rows()));
    for (int r = 0; r < ds.n_rows(); ++r) {
        std::vector<std::string> cells;
        cells.reserve(static_cast<std::size_t>(ds.n_features()) + 1);
        for (int c = 0; c < ds.n_features(); ++c) cells.push_back(format_number(ds.at(r, c)));
        cells.push_back(std::to_string(ds.y[static_cast<std::size_t>(r)]));
        table.rows.push_back(std::move(cells));
    }
    write_csv(table, path);
}

} // namespace xmc
