#pragma once

#include <string>
#include <vector>

namespace xmc {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a UTF-8 CSV with a header row. Handles quoted fields with embedded
// commas and doubled quotes; fields may not span lines. Throws DataError
// with the 1-based row number on malformed input, and on duplicate or empty
// header names.
CsvTable read_csv(const std::string& path);

void write_csv(const CsvTable& table, const std::string& path);

// Shortest representation that parses back to the same double; "" for NaN.
std::string format_number(double v);

// Parses a full-string double. Returns false if the text is not numeric.
bool parse_number(const std::string& text, double& out);

} // namespace xmc
