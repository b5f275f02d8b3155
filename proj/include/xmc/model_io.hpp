#pragma once

#include "xmc/classifier.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace xmc {

using ojson = nlohmann::ordered_json;

// A fitted model plus the schema names and resolved hyperparameters it was
// trained with; the unit of model file I/O.
struct ModelBundle {
    std::unique_ptr<Classifier> model;
    std::vector<std::string> feature_names;
    ojson params;
};

// Known model kinds: dt, rf, gb, nb, lr, svm.
bool known_model_kind(const std::string& kind);

// Fully-resolved default hyperparameters per kind (tree kinds default to the
// tuned configurations shipped with the CLI).
ojson default_params(const std::string& kind);

// Merges `overrides` over the kind's defaults; unknown keys are an error.
ojson resolve_params(const std::string& kind, const ojson& overrides);

ModelBundle train_model(const std::string& kind, const ojson& params_override,
                        const Dataset& train, std::uint64_t seed, int n_threads = 0);

ojson model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(const ojson& j);

void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

// Writes JSON with a trailing newline; fixed key order keeps reruns
// byte-identical.
void write_json_file(const ojson& j, const std::string& path);
ojson read_json_file(const std::string& path);

} // namespace xmc
