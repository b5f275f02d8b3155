#include "xmc/synth.hpp"

#include "xmc/errors.hpp"
#include "xmc/rng.hpp"

#include <algorithm>
#include <cmath>

namespace xmc {

namespace {

const std::vector<std::string>& synth_column_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"S1", "S2", "S3"};
        for (int i = 1; i <= 7; ++i) v.push_back("Q4_" + std::to_string(i));
        v.insert(v.end(), {"Q5", "Q6", "Q6b", "Q7"});
        for (int i = 1; i <= 7; ++i) v.push_back("Q8x" + std::to_string(i));
        for (int i = 9; i <= 15; ++i) v.push_back("Q" + std::to_string(i));
        v.insert(v.end(), {"Q17", "Q18", "Q19"});
        for (int i = 1; i <= 3; ++i) v.push_back("Q20x" + std::to_string(i));
        v.insert(v.end(), {"Q21", "Q22", "Q23"});
        for (int i = 1; i <= 7; ++i) v.push_back("Q24_" + std::to_string(i));
        v.insert(v.end(), {"Q24DK", "Q25", "Q26", "Q27", "Q28", "Q29"});
        v.insert(v.end(), {"hage", "gender", "hIncome", "hChild", "hHousehold", "hGender",
                           "hRegeion"});
        return v;
    }();
    return names;
}

} // namespace

FeatureSchema synth_schema() { return FeatureSchema::from_names(synth_column_names()); }

std::vector<std::string> planted_feature_names(int n_planted) {
    // Q4_1 (shared-diagnosis indicator), Q18/Q19 (cannabis use) first, then
    // further numeric questions in schema order.
    std::vector<std::string> planted = {"Q4_1", "Q18", "Q19"};
    if (n_planted <= static_cast<int>(planted.size())) {
        planted.resize(static_cast<std::size_t>(std::max(n_planted, 0)));
        return planted;
    }
    const FeatureSchema schema = synth_schema();
    for (const auto& f : schema.features()) {
        if (static_cast<int>(planted.size()) >= n_planted) break;
        if (f.kind != FeatureKind::numeric) continue;
        if (std::find(planted.begin(), planted.end(), f.name) != planted.end()) continue;
        planted.push_back(f.name);
    }
    return planted;
}

Dataset synth_generate(const SynthConfig& config) {
    if (config.rows_per_wave < 1) throw DataError("rows_per_wave must be >= 1");
    if (config.n_planted < 0) throw DataError("n_planted must be >= 0");
    if (!(config.drift_strength >= 0.0)) throw DataError("drift_strength must be >= 0");

    Dataset ds;
    ds.schema = synth_schema();
    const int d = ds.schema.size();
    if (config.n_planted > d) throw DataError("n_planted exceeds feature count");

    std::vector<bool> planted(static_cast<std::size_t>(d), false);
    for (const auto& name : planted_feature_names(config.n_planted)) {
        planted[static_cast<std::size_t>(ds.schema.index_of(name))] = true;
    }

    // Per-feature noise parameters, fixed across waves.
    Rng param_rng(derive_seed(config.seed, 0xBA5Eu));
    std::vector<double> noise_mean(static_cast<std::size_t>(d));
    std::vector<double> noise_sd(static_cast<std::size_t>(d));
    std::vector<double> indicator_rate(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
        noise_mean[static_cast<std::size_t>(c)] = 1.0 + 4.0 * param_rng.uniform();
        noise_sd[static_cast<std::size_t>(c)] = 0.5 + param_rng.uniform();
        indicator_rate[static_cast<std::size_t>(c)] = 0.1 + 0.4 * param_rng.uniform();
    }

    const int n_waves = 6;
    ds.n_classes = n_waves;
    ds.x.reserve(static_cast<std::size_t>(config.rows_per_wave) * n_waves *
                 static_cast<std::size_t>(d));
    ds.y.reserve(static_cast<std::size_t>(config.rows_per_wave) * n_waves);

    for (int wave = 1; wave <= n_waves; ++wave) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(wave)));
        for (int r = 0; r < config.rows_per_wave; ++r) {
            for (int c = 0; c < d; ++c) {
                const auto ci = static_cast<std::size_t>(c);
                const bool indicator = ds.schema.at(c).kind == FeatureKind::one_hot;
                double v = 0;
                if (planted[ci]) {
                    if (indicator) {
                        const double rate = std::clamp(
                            0.08 + 0.12 * config.drift_strength * (wave - 1), 0.02, 0.98);
                        v = rng.bernoulli(rate) ? 1.0 : 0.0;
                    } else {
                        v = rng.normal(config.drift_strength * (wave - 1), 1.0);
                    }
                } else if (indicator) {
                    v = rng.bernoulli(indicator_rate[ci]) ? 1.0 : 0.0;
                } else {
                    // Likert-style integer answers.
                    v = std::round(std::clamp(rng.normal(noise_mean[ci], noise_sd[ci]), 0.0, 7.0));
                }
                ds.x.push_back(v);
            }
            ds.y.push_back(wave);
        }
    }
    return ds;
}

} // namespace xmc
