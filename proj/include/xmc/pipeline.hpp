#pragma once

#include "xmc/dataset.hpp"
#include "xmc/lime.hpp"
#include "xmc/model_io.hpp"
#include "xmc/survey.hpp"
#include "xmc/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace xmc {

struct IngestResult {
    Dataset dataset;
    std::vector<std::pair<std::string, std::size_t>> missingness;
    ImputationStats imputation;
};

// Full preprocessing chain: load -> harmonize Q4 -> drop -> concatenate ->
// impute. Wave ids follow the path order (1..n).
IngestResult ingest_waves(const std::vector<std::string>& wave_paths);

struct RunConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    // Data source: wave CSVs when nonempty, otherwise the synthetic
    // generator.
    std::vector<std::string> wave_paths;
    SynthConfig synth{250, 3, 1.5, 0}; // synth.seed is taken from `seed`
    double train_fraction = 0.8;
    std::vector<std::string> models = {"rf", "gb"};
    ojson model_params = ojson::object(); // per-kind overrides
    bool tune = false;
    int tune_folds = 3;
    int cv_folds = 0; // 0 = skip cross-validation artifacts
    LimeConfig lime{1000, 0.0, 1.0, 5, 0};
    int max_explanations = 0; // 0 = every test row
    int topk_lime = 3;
    int topk_gini = 5;
    int n_threads = 0;
    bool record_timings = false; // keep timing out of artifacts by default

    static RunConfig from_json(const ojson& j);
    ojson to_json() const;
};

// Executes the full protocol (data -> split -> train -> evaluate -> explain
// -> importance -> retrain -> fact sheet) and writes every artifact under
// out_dir. Reruns with the same config are byte-identical; timings go to
// stdout unless record_timings is set.
void run_full_pipeline(const RunConfig& config);

ojson explanation_to_json(const LimeExplanation& expl,
                          const std::vector<std::string>& feature_names, int row_index);
LimeExplanation explanation_from_json(const ojson& j, std::vector<std::string>* feature_names,
                                      int* row_index);

ojson imputation_to_json(const ImputationStats& stats);
ojson missingness_to_json(const std::vector<std::pair<std::string, std::size_t>>& report);

} // namespace xmc
