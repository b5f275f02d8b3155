#include "xmc/survey.hpp"

#include "xmc/csv.hpp"
#include "xmc/errors.hpp"
#include "xmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xmc {

int RawSurveyTable::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

void RawSurveyTable::drop_column(const std::string& name) {
    const int idx = column_index(name);
    if (idx < 0) return;
    columns.erase(columns.begin() + idx);
    for (auto& row : rows) row.erase(row.begin() + idx);
}

const std::vector<std::string>& dropped_columns() {
    static const std::vector<std::string> cols = {"Q23CP",  "Q16",      "Status",
                                                  "Respid", "language", "agreement"};
    return cols;
}

RawSurveyTable load_wave_csv(const std::string& path, int wave_id) {
    if (wave_id < 1 || wave_id > 6) {
        throw DataError("wave_id " + std::to_string(wave_id) + " outside [1,6]");
    }
    const CsvTable csv = read_csv(path);
    RawSurveyTable table;
    table.wave_id = wave_id;
    table.columns = csv.header;
    table.rows.reserve(csv.rows.size());
    for (const auto& cells : csv.rows) {
        std::vector<Cell> row;
        row.reserve(cells.size());
        for (const auto& text : cells) {
            if (text.empty() || text == "NA") {
                row.emplace_back(std::monostate{});
                continue;
            }
            double v = 0;
            if (parse_number(text, v)) row.emplace_back(v);
            else row.emplace_back(text);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<RawSurveyTable> harmonize_q4(std::vector<RawSurveyTable> tables) {
    for (auto& table : tables) {
        const bool any_q4 = std::any_of(table.columns.begin(), table.columns.end(),
                                        [](const std::string& c) { return c.rfind("Q4_", 0) == 0; });
        if (!any_q4) {
            throw DataError("wave " + std::to_string(table.wave_id) + ": no Q4 option columns");
        }
        const int self_idx = table.column_index(kQ4SplitSelf);
        const int other_idx = table.column_index(kQ4SplitOther);
        if (self_idx < 0 && other_idx < 0) continue; // already merged
        if (self_idx < 0 || other_idx < 0) {
            throw DataError("wave " + std::to_string(table.wave_id) +
                            ": Q4 split options incomplete");
        }
        if (table.has_column(kQ4Merged)) {
            throw DataError("wave " + std::to_string(table.wave_id) +
                            ": both split and merged Q4 options present");
        }
        // Merged indicator is set when either split option is; missing only
        // when both are missing.
        table.columns[static_cast<std::size_t>(self_idx)] = kQ4Merged;
        for (auto& row : table.rows) {
            const Cell& self = row[static_cast<std::size_t>(self_idx)];
            const Cell& other = row[static_cast<std::size_t>(other_idx)];
            Cell merged;
            if (cell_missing(self) && cell_missing(other)) {
                merged = std::monostate{};
            } else {
                const double a = cell_numeric(self) ? cell_value(self) : 0.0;
                const double b = cell_numeric(other) ? cell_value(other) : 0.0;
                merged = std::max(a, b);
            }
            row[static_cast<std::size_t>(self_idx)] = merged;
            row.erase(row.begin() + other_idx);
        }
        table.columns.erase(table.columns.begin() + other_idx);
    }
    return tables;
}

std::vector<RawSurveyTable> drop_inconsistent(std::vector<RawSurveyTable> tables) {
    for (auto& table : tables) {
        for (const auto& name : dropped_columns()) table.drop_column(name);
    }
    return tables;
}

std::vector<std::pair<std::string, std::size_t>> missingness_report(
    const std::vector<RawSurveyTable>& tables) {
    std::vector<std::pair<std::string, std::size_t>> report;
    auto slot = [&report](const std::string& name) -> std::size_t& {
        for (auto& [n, count] : report) {
            if (n == name) return count;
        }
        report.emplace_back(name, 0);
        return report.back().second;
    };
    for (const auto& table : tables) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            std::size_t& count = slot(table.columns[c]);
            for (const auto& row : table.rows) {
                if (cell_missing(row[c])) ++count;
            }
        }
    }
    return report;
}

Dataset concatenate_and_label(const std::vector<RawSurveyTable>& tables) {
    if (tables.empty()) throw DataError("no survey tables to concatenate");

    std::vector<std::string> feature_columns;
    for (const auto& name : tables.front().columns) {
        if (name != kLabelColumn) feature_columns.push_back(name);
    }
    for (const auto& table : tables) {
        std::vector<std::string> cols;
        for (const auto& name : table.columns) {
            if (name != kLabelColumn) cols.push_back(name);
        }
        auto sorted_a = feature_columns, sorted_b = cols;
        std::sort(sorted_a.begin(), sorted_a.end());
        std::sort(sorted_b.begin(), sorted_b.end());
        if (sorted_a != sorted_b) {
            throw DataError("wave " + std::to_string(table.wave_id) +
                            ": column set differs from wave " +
                            std::to_string(tables.front().wave_id));
        }
    }

    Dataset ds;
    ds.schema = FeatureSchema::from_names(feature_columns);
    const int d = ds.schema.size();
    std::size_t total_rows = 0;
    for (const auto& table : tables) total_rows += table.rows.size();
    ds.x.reserve(total_rows * static_cast<std::size_t>(d));
    ds.y.reserve(total_rows);
    ds.n_classes = 6;

    std::vector<double> row(static_cast<std::size_t>(d));
    for (const auto& table : tables) {
        std::vector<int> dest(table.columns.size(), -1);
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            dest[c] = ds.schema.index_of(table.columns[c]); // -1 for hWave
        }
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            std::fill(row.begin(), row.end(), std::nan(""));
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                if (dest[c] < 0) continue;
                const Cell& cell = table.rows[r][c];
                if (cell_missing(cell)) continue;
                if (!cell_numeric(cell)) {
                    throw DataError("wave " + std::to_string(table.wave_id) + " row " +
                                    std::to_string(r + 1) + ": non-numeric value in column " +
                                    table.columns[c]);
                }
                row[static_cast<std::size_t>(dest[c])] = cell_value(cell);
            }
            ds.x.insert(ds.x.end(), row.begin(), row.end());
            ds.y.push_back(table.wave_id);
        }
    }
    return ds;
}

std::pair<Dataset, ImputationStats> impute_mean(const Dataset& ds) {
    const int d = ds.n_features();
    const int n = ds.n_rows();
    ImputationStats stats;
    stats.feature_names = ds.schema.names();
    stats.mean.assign(static_cast<std::size_t>(d), 0.0);
    stats.missing_count.assign(static_cast<std::size_t>(d), 0);

    Dataset out = ds;
    for (int c = 0; c < d; ++c) {
        double sum = 0;
        std::size_t observed = 0;
        for (int r = 0; r < n; ++r) {
            const double v = ds.at(r, c);
            if (std::isnan(v)) {
                ++stats.missing_count[static_cast<std::size_t>(c)];
            } else {
                sum += v;
                ++observed;
            }
        }
        if (observed == 0) {
            throw DataError("feature " + ds.schema.at(c).name + ": all values missing");
        }
        const double mean = sum / static_cast<double>(observed);
        stats.mean[static_cast<std::size_t>(c)] = mean;
        if (stats.missing_count[static_cast<std::size_t>(c)] > 0) {
            for (int r = 0; r < n; ++r) {
                if (std::isnan(out.at(r, c))) out.at(r, c) = mean;
            }
        }
    }
    return {std::move(out), std::move(stats)};
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction,
                                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
        throw DataError("train_fraction outside (0, 1]");
    }
    const auto counts = ds.class_counts();
    for (int k = 0; k < ds.n_classes; ++k) {
        if (counts[static_cast<std::size_t>(k)] == 0) {
            throw DataError("class " + std::to_string(k + 1) + " has no rows");
        }
    }

    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.n_classes));
    for (int r = 0; r < ds.n_rows(); ++r) {
        by_class[static_cast<std::size_t>(ds.y[static_cast<std::size_t>(r)] - 1)].push_back(r);
    }

    std::vector<int> train_rows, test_rows;
    for (int k = 0; k < ds.n_classes; ++k) {
        auto& rows = by_class[static_cast<std::size_t>(k)];
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        rng.shuffle(rows);
        // Epsilon guards exact products (0.8 * 1000) against FP round-down.
        const auto train_n = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(rows.size()) + 1e-9));
        train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + train_n);
        test_rows.insert(test_rows.end(), rows.begin() + train_n, rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {ds.select_rows(train_rows), ds.select_rows(test_rows)};
}

} // namespace xmc
