#pragma once

#include "xmc/model_io.hpp"

#include <string>
#include <vector>

namespace xmc {

// One assessment row comparing the two explanation systems. Multi-option
// rows list the checked options; free-text rows hold a single entry.
struct FactSheetRow {
    std::string id;      // F1..F9, O1..O10, U1..U11, S1..S4, V1..V2
    std::string section; // functional | operational | usability | safety | validation
    std::string name;
    std::vector<std::string> lime;
    std::vector<std::string> gini;
};

struct FactSheet {
    std::vector<FactSheetRow> rows;
    double lime_mean_r2 = 0.0;
};

// Static assessment content with the computed soundness injected into U1
// ("R^2 = x.xx").
FactSheet build_factsheet(double lime_mean_r2);

ojson factsheet_to_json(const FactSheet& fs);
std::string factsheet_to_text(const FactSheet& fs);

} // namespace xmc
