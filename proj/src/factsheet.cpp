#include "xmc/factsheet.hpp"

#include <cstdio>
#include <sstream>

namespace xmc {

namespace {

std::string format_r2(double r2) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "R\u00b2 = %.2f", r2);
    return buf;
}

} // namespace

FactSheet build_factsheet(double lime_mean_r2) {
    FactSheet fs;
    fs.lime_mean_r2 = lime_mean_r2;
    auto& r = fs.rows;

    r.push_back({"F1", "functional", "Problem supervision level",
                 {"Supervised", "Semi-supervised"},
                 {"Supervised", "Semi-supervised"}});
    r.push_back({"F2", "functional", "Problem type",
                 {"Classification", "Regression"},
                 {"Classification"}});
    r.push_back({"F3", "functional", "Explanation target", {"Prediction"}, {"Models", "Prediction"}});
    r.push_back({"F4", "functional", "Explanation breadth/scope", {"Local"}, {"Global"}});
    r.push_back({"F5", "functional", "Computational complexity",
                 {"\u03a9(g), g is the model complexity"},
                 {"O(fc), f is the number of features and c is the number of categories of each "
                  "feature"}});
    r.push_back({"F6", "functional", "Applicable model class", {"Model-agnostic"}, {"Model-specific"}});
    r.push_back({"F7", "functional", "Relation to the predictive system", {"Post-hoc"}, {"Ante-hoc"}});
    r.push_back({"F8", "functional", "Compatible feature types",
                 {"Tabular", "Images (convert to binary)", "Text (convert to binary)"},
                 {"Tabular", "Images (convert to binary)", "Text (convert to binary)"}});
    r.push_back({"F9", "functional", "Caveats and assumptions", {}, {}});

    r.push_back({"O1", "operational", "Explanation family",
                 {"Association between antecedents and consequent"},
                 {"Association between antecedents and consequent"}});
    r.push_back({"O2", "operational", "Explanatory medium", {"Visualization"}, {"Visualization"}});
    r.push_back({"O3", "operational", "System interaction", {"Static"}, {"Static"}});
    r.push_back({"O4", "operational", "Explanation domain",
                 {"Original domain", "Interpretable data representation"},
                 {"Original domain"}});
    r.push_back({"O5", "operational", "Data and model transparency",
                 {"Transparent (tabular data)"},
                 {"Transparent (tabular data)"}});
    r.push_back({"O6", "operational", "Explanation audience",
                 {"General knowledge"},
                 {"General knowledge"}});
    r.push_back({"O7", "operational", "Function of the explanation",
                 {"Explaining", "Accountability"},
                 {"Explaining", "Accountability"}});
    r.push_back({"O8", "operational", "Causality vs. actionability", {"Actionable"}, {"Actionable"}});
    r.push_back({"O9", "operational", "Trust vs. performance",
                 {"Trust"},
                 {"Trust", "Predictive performance"}});
    r.push_back({"O10", "operational", "Provenance",
                 {"Predictive model", "Dataset"},
                 {"Predictive model", "Dataset"}});

    r.push_back({"U1", "usability", "Soundness", {format_r2(lime_mean_r2)}, {"Not applicable"}});
    r.push_back({"U2", "usability", "Completeness", {"No"}, {"Yes"}});
    r.push_back({"U3", "usability", "Contextfulness", {"No"}, {"No"}});
    r.push_back({"U4", "usability", "Interactiveness", {"No"}, {"No"}});
    r.push_back({"U5", "usability", "Actionability", {"No"}, {"No"}});
    r.push_back({"U6", "usability", "Chronology", {"No"}, {"No"}});
    r.push_back({"U7", "usability", "Coherence", {"No"}, {"No"}});
    r.push_back({"U8", "usability", "Novelty", {"No"}, {"No"}});
    r.push_back({"U9", "usability", "Complexity", {"No"}, {"No"}});
    r.push_back({"U10", "usability", "Personalisation", {"No"}, {"No"}});
    r.push_back({"U11", "usability", "Parsimony", {"Yes"}, {"No"}});

    r.push_back({"S1", "safety", "Information leakage", {"No"}, {"Yes"}});
    r.push_back({"S2", "safety", "Explanation misuse", {"Yes"}, {"Yes"}});
    r.push_back({"S3", "safety", "Explanation invariance",
                 {"Consistent", "Unstable"},
                 {"Consistent", "Stable"}});
    r.push_back({"S4", "safety", "Explanation quality", {"Not considered"}, {"Not applicable"}});

    r.push_back({"V1", "validation", "User studies",
                 {"Section 6 of the LIME paper"},
                 {"Not applicable"}});
    r.push_back({"V2", "validation", "Synthetic experiments",
                 {"Section 5 of the LIME paper"},
                 {"Not applicable"}});
    return fs;
}

ojson factsheet_to_json(const FactSheet& fs) {
    ojson j;
    j["lime_mean_r2"] = fs.lime_mean_r2;
    ojson rows = ojson::array();
    for (const auto& row : fs.rows) {
        ojson rj;
        rj["id"] = row.id;
        rj["section"] = row.section;
        rj["name"] = row.name;
        rj["lime"] = row.lime;
        rj["gini_importance"] = row.gini;
        rows.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows);
    return j;
}

std::string factsheet_to_text(const FactSheet& fs) {
    std::ostringstream out;
    out << "Explainability fact sheet: LIME vs Gini importance\n";
    std::string section;
    auto join = [](const std::vector<std::string>& parts) {
        std::string s;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) s += "; ";
            s += parts[i];
        }
        return s.empty() ? std::string("-") : s;
    };
    for (const auto& row : fs.rows) {
        if (row.section != section) {
            section = row.section;
            out << "\n[" << section << "]\n";
        }
        out << row.id << " " << row.name << "\n";
        out << "  LIME: " << join(row.lime) << "\n";
        out << "  Gini importance: " << join(row.gini) << "\n";
    }
    return out.str();
}

} // namespace xmc
