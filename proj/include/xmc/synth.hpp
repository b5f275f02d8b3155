#pragma once

#include "xmc/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace xmc {

// Synthetic stand-in for the private six-wave survey data. The schema mirrors
// the post-preprocessing survey layout (numeric questions plus the Q4 and Q24
// one-hot groups). `n_planted` features get wave-dependent distributions whose
// means drift monotonically with the wave index; everything else is
// wave-independent noise.
struct SynthConfig {
    int rows_per_wave = 1000;
    int n_planted = 3;
    double drift_strength = 1.5;
    std::uint64_t seed = 0;
};

// Post-preprocessing survey-like schema (one Q4 group, one Q24 group, the
// rest numeric).
FeatureSchema synth_schema();

// Planted feature names in planting order; the first three are the Q4_1, Q18
// and Q19 analogs.
std::vector<std::string> planted_feature_names(int n_planted);

Dataset synth_generate(const SynthConfig& config);

} // namespace xmc
