#pragma once

#include "xmc/dataset.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace xmc {

// One survey answer cell: missing, numeric, or free text.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool cell_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
inline bool cell_numeric(const Cell& c) { return std::holds_alternative<double>(c); }
inline double cell_value(const Cell& c) { return std::get<double>(c); }

// One wave's raw answers. All rows are aligned to `columns`.
struct RawSurveyTable {
    int wave_id = 0; // 1..6
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    int column_index(const std::string& name) const;
    bool has_column(const std::string& name) const { return column_index(name) >= 0; }
    void drop_column(const std::string& name);
};

// Waves 5-6 split the "tested positive" option of Q4 into a self/other pair;
// these are the split column names and their merged target.
inline constexpr const char* kQ4SplitSelf = "Q4_1A";
inline constexpr const char* kQ4SplitOther = "Q4_1B";
inline constexpr const char* kQ4Merged = "Q4_1";

// Columns removed by drop_inconsistent: the wave-5/6-only question, the
// highly-missing question, and survey metadata never answered by respondents.
const std::vector<std::string>& dropped_columns();

// Loads one wave's CSV. Header = question ids; empty cells and "NA" are
// missing; anything non-numeric is kept as text.
RawSurveyTable load_wave_csv(const std::string& path, int wave_id);

// Merges the split Q4 "tested positive" indicators of waves 5-6 into the
// unified single indicator used by waves 1-4. Tables already carrying the
// merged option pass through unchanged. Throws DataError when a table has no
// Q4 option columns at all.
std::vector<RawSurveyTable> harmonize_q4(std::vector<RawSurveyTable> tables);

// Removes Q23CP, Q16 and the metadata columns; absent columns are skipped.
std::vector<RawSurveyTable> drop_inconsistent(std::vector<RawSurveyTable> tables);

// Missing-cell counts per feature across all tables, in first-appearance
// column order.
std::vector<std::pair<std::string, std::size_t>> missingness_report(
    const std::vector<RawSurveyTable>& tables);

// Concatenates harmonized, dropped tables into one labeled Dataset. Labels
// come from wave_id; a leftover hWave column is skipped (it duplicates the
// label). Missing cells stay NaN; impute_mean clears them.
Dataset concatenate_and_label(const std::vector<RawSurveyTable>& tables);

struct ImputationStats {
    std::vector<std::string> feature_names;
    std::vector<double> mean;
    std::vector<std::size_t> missing_count;
};

// Replaces every missing cell by its feature's mean over observed values.
// Means are computed over the full dataset (matching the upstream protocol;
// imputing before the train/test split leaks test statistics into training).
std::pair<Dataset, ImputationStats> impute_mean(const Dataset& ds);

// Per-class split at train_fraction; floor on the train count, remainder to
// test. Deterministic under seed; throws DataError on an empty class.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_fraction,
                                             std::uint64_t seed);

} // namespace xmc
