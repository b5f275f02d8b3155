#include "xmc/model_io.hpp"

#include "xmc/baselines.hpp"
#include "xmc/errors.hpp"
#include "xmc/tree.hpp"

#include <fstream>

namespace xmc {

namespace {

// Node keys: w = weighted_n, h = impurity, c = class counts, v = leaf value,
// f/t = split feature/threshold, l/r = children.
ojson node_to_json(const TreeNode& node, bool regression) {
    ojson j;
    j["w"] = node.weighted_n;
    j["h"] = node.impurity;
    if (regression) j["v"] = node.value;
    else j["c"] = node.class_counts;
    if (!node.is_leaf()) {
        j["f"] = node.feature;
        j["t"] = node.threshold;
        j["l"] = node_to_json(*node.left, regression);
        j["r"] = node_to_json(*node.right, regression);
    }
    return j;
}

std::unique_ptr<TreeNode> node_from_json(const ojson& j, bool regression) {
    auto node = std::make_unique<TreeNode>();
    node->weighted_n = j.at("w").get<double>();
    node->impurity = j.at("h").get<double>();
    if (regression) {
        node->value = j.at("v").get<double>();
    } else {
        node->class_counts = j.at("c").get<std::vector<double>>();
        double total = 0;
        for (double c : node->class_counts) total += c;
        node->class_proportions.resize(node->class_counts.size());
        for (std::size_t k = 0; k < node->class_counts.size(); ++k) {
            node->class_proportions[k] = total > 0 ? node->class_counts[k] / total : 0.0;
        }
    }
    if (j.contains("f")) {
        node->feature = j.at("f").get<int>();
        node->threshold = j.at("t").get<double>();
        node->left = node_from_json(j.at("l"), regression);
        node->right = node_from_json(j.at("r"), regression);
    }
    return node;
}

TreeParams tree_params_from_json(const ojson& p) {
    TreeParams tp;
    tp.max_depth = p.at("max_depth").get<int>();
    tp.max_features = p.at("max_features").get<int>();
    tp.min_samples_split = p.at("min_samples_split").get<int>();
    tp.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    return tp;
}

} // namespace

// Builds concrete models from JSON; friend of the model classes.
struct TreeCodec {
    static ojson dump(const DecisionTreeModel& m) {
        ojson j;
        j["root"] = node_to_json(m.root(), false);
        return j;
    }
    static std::unique_ptr<DecisionTreeModel> load_tree(const ojson& j, const ojson& params,
                                                        int n_classes, int n_features,
                                                        std::uint64_t seed) {
        auto m = std::make_unique<DecisionTreeModel>();
        m->root_ = node_from_json(j.at("root"), false);
        m->params_ = tree_params_from_json(params);
        m->n_classes_ = n_classes;
        m->n_features_ = n_features;
        m->seed_ = seed;
        return m;
    }

    static ojson dump(const ForestModel& m) {
        ojson j;
        ojson trees = ojson::array();
        for (const auto& tree : m.trees()) trees.push_back(node_to_json(tree.root(), false));
        j["trees"] = std::move(trees);
        return j;
    }
    static std::unique_ptr<ForestModel> load_forest(const ojson& j, const ojson& params,
                                                    int n_classes, int n_features,
                                                    std::uint64_t seed) {
        auto m = std::make_unique<ForestModel>();
        m->params_.n_estimators = params.at("n_estimators").get<int>();
        m->params_.bootstrap = params.at("bootstrap").get<bool>();
        m->params_.tree = tree_params_from_json(params);
        m->n_classes_ = n_classes;
        m->n_features_ = n_features;
        m->seed_ = seed;
        for (const auto& tj : j.at("trees")) {
            DecisionTreeModel tree;
            tree.root_ = node_from_json(tj, false);
            tree.params_ = m->params_.tree;
            tree.n_classes_ = n_classes;
            tree.n_features_ = n_features;
            m->trees_.push_back(std::move(tree));
        }
        if (static_cast<int>(m->trees_.size()) != m->params_.n_estimators) {
            throw DataError("forest model: tree count != n_estimators");
        }
        return m;
    }

    static ojson dump(const GbmModel& m) {
        ojson j;
        j["initial_scores"] = std::vector<double>(m.initial_scores().begin(),
                                                  m.initial_scores().end());
        ojson stages = ojson::array();
        for (const auto& round : m.stages()) {
            ojson round_j = ojson::array();
            for (const auto& tree : round) round_j.push_back(node_to_json(*tree, true));
            stages.push_back(std::move(round_j));
        }
        j["stages"] = std::move(stages);
        return j;
    }
    static std::unique_ptr<GbmModel> load_gbm(const ojson& j, const ojson& params, int n_classes,
                                              int n_features, std::uint64_t seed) {
        auto m = std::make_unique<GbmModel>();
        m->params_.learning_rate = params.at("learning_rate").get<double>();
        m->params_.n_estimators = params.at("n_estimators").get<int>();
        m->params_.max_depth = params.at("max_depth").get<int>();
        m->params_.min_samples_split = params.at("min_samples_split").get<int>();
        m->params_.min_samples_leaf = params.at("min_samples_leaf").get<int>();
        m->n_classes_ = n_classes;
        m->n_features_ = n_features;
        m->seed_ = seed;
        m->initial_scores_ = j.at("initial_scores").get<std::vector<double>>();
        for (const auto& round_j : j.at("stages")) {
            std::vector<std::unique_ptr<TreeNode>> round;
            for (const auto& tj : round_j) round.push_back(node_from_json(tj, true));
            m->stages_.push_back(std::move(round));
        }
        return m;
    }
};

struct BaselineCodec {
    static ojson dump_standardizer(const Standardizer& s) {
        ojson j;
        j["mean"] = s.mean;
        j["stddev"] = s.stddev;
        return j;
    }
    static Standardizer load_standardizer(const ojson& j) {
        Standardizer s;
        s.mean = j.at("mean").get<std::vector<double>>();
        s.stddev = j.at("stddev").get<std::vector<double>>();
        return s;
    }

    static ojson dump(const GaussianNbModel& m) {
        ojson j;
        j["priors"] = m.priors();
        j["mean"] = m.means();
        j["var"] = m.variances();
        return j;
    }
    static std::unique_ptr<GaussianNbModel> load_nb(const ojson& j, int n_classes, int n_features) {
        auto m = std::make_unique<GaussianNbModel>();
        m->priors_ = j.at("priors").get<std::vector<double>>();
        m->mean_ = j.at("mean").get<std::vector<std::vector<double>>>();
        m->var_ = j.at("var").get<std::vector<std::vector<double>>>();
        m->n_classes_ = n_classes;
        m->n_features_ = n_features;
        return m;
    }

    static ojson dump(const LogisticModel& m) {
        ojson j;
        j["weights"] = m.weights();
        j["bias"] = m.bias();
        j["standardizer"] = dump_standardizer(m.standardizer());
        j["loss_trace"] = m.loss_trace();
        return j;
    }
    static std::unique_ptr<LogisticModel> load_lr(const ojson& j, int n_classes, int n_features) {
        auto m = std::make_unique<LogisticModel>();
        m->weights_ = j.at("weights").get<std::vector<double>>();
        m->bias_ = j.at("bias").get<std::vector<double>>();
        m->standardizer_ = load_standardizer(j.at("standardizer"));
        m->loss_trace_ = j.at("loss_trace").get<std::vector<double>>();
        m->n_classes_ = n_classes;
        m->n_features_ = n_features;
        return m;
    }

    static ojson dump(const LinearSvmModel& m) {
        ojson j;
        j["weights"] = m.weights_;
        j["bias"] = m.bias_;
        j["standardizer"] = dump_standardizer(m.standardizer());
        j["temperature"] = m.temperature_;
        j["objective_trace"] = m.objective_trace();
        return j;
    }
    static std::unique_ptr<LinearSvmModel> load_svm(const ojson& j, int n_classes, int n_features) {
        auto m = std::make_unique<LinearSvmModel>();
        m->weights_ = j.at("weights").get<std::vector<double>>();
        m->bias_ = j.at("bias").get<std::vector<double>>();
        m->standardizer_ = load_standardizer(j.at("standardizer"));
        m->temperature_ = j.at("temperature").get<double>();
        m->objective_trace_ = j.at("objective_trace").get<std::vector<double>>();
        m->n_classes_ = n_classes;
        m->n_features_ = n_features;
        return m;
    }
};

bool known_model_kind(const std::string& kind) {
    return kind == "dt" || kind == "rf" || kind == "gb" || kind == "nb" || kind == "lr" ||
           kind == "svm";
}

ojson default_params(const std::string& kind) {
    ojson p;
    if (kind == "dt") {
        p["max_depth"] = 20;
        p["max_features"] = 61;
        p["min_samples_split"] = 3;
        p["min_samples_leaf"] = 3;
    } else if (kind == "rf") {
        p["n_estimators"] = 500;
        p["max_depth"] = 6;
        p["max_features"] = 61;
        p["min_samples_split"] = 4;
        p["min_samples_leaf"] = 1;
        p["bootstrap"] = true;
    } else if (kind == "gb") {
        p["learning_rate"] = 0.1;
        p["n_estimators"] = 150;
        p["max_depth"] = 1;
        p["min_samples_split"] = 2;
        p["min_samples_leaf"] = 1;
    } else if (kind == "nb") {
        p["var_floor"] = 1e-9;
    } else if (kind == "lr") {
        p["epochs"] = 300;
        p["step"] = 0.5;
    } else if (kind == "svm") {
        p["epochs"] = 60;
        p["step"] = 0.01;
        p["reg"] = 1e-4;
    } else {
        throw UsageError("unknown model kind '" + kind + "'");
    }
    return p;
}

ojson resolve_params(const std::string& kind, const ojson& overrides) {
    ojson p = default_params(kind);
    if (overrides.is_null()) return p;
    if (!overrides.is_object()) throw UsageError("model params must be a JSON object");
    for (const auto& [key, value] : overrides.items()) {
        if (!p.contains(key)) {
            throw UsageError("unknown parameter '" + key + "' for model kind '" + kind + "'");
        }
        p[key] = value;
    }
    return p;
}

ModelBundle train_model(const std::string& kind, const ojson& params_override,
                        const Dataset& train, std::uint64_t seed, int n_threads) {
    ModelBundle bundle;
    bundle.params = resolve_params(kind, params_override);
    bundle.feature_names = train.schema.names();
    const ojson& p = bundle.params;
    if (kind == "dt") {
        bundle.model =
            std::make_unique<DecisionTreeModel>(fit_tree(train, tree_params_from_json(p), seed));
    } else if (kind == "rf") {
        ForestParams fp;
        fp.n_estimators = p.at("n_estimators").get<int>();
        fp.bootstrap = p.at("bootstrap").get<bool>();
        fp.tree = tree_params_from_json(p);
        bundle.model = std::make_unique<ForestModel>(fit_forest(train, fp, seed, n_threads));
    } else if (kind == "gb") {
        GbmParams gp;
        gp.learning_rate = p.at("learning_rate").get<double>();
        gp.n_estimators = p.at("n_estimators").get<int>();
        gp.max_depth = p.at("max_depth").get<int>();
        gp.min_samples_split = p.at("min_samples_split").get<int>();
        gp.min_samples_leaf = p.at("min_samples_leaf").get<int>();
        bundle.model = std::make_unique<GbmModel>(fit_gbm(train, gp, seed));
    } else if (kind == "nb") {
        bundle.model = std::make_unique<GaussianNbModel>(
            fit_gaussian_nb(train, p.at("var_floor").get<double>()));
    } else if (kind == "lr") {
        bundle.model = std::make_unique<LogisticModel>(
            fit_logistic(train, p.at("epochs").get<int>(), p.at("step").get<double>(), seed));
    } else if (kind == "svm") {
        bundle.model = std::make_unique<LinearSvmModel>(
            fit_linear_svm(train, p.at("epochs").get<int>(), p.at("step").get<double>(),
                           p.at("reg").get<double>(), seed));
    } else {
        throw UsageError("unknown model kind '" + kind + "'");
    }
    return bundle;
}

ojson model_to_json(const ModelBundle& bundle) {
    const Classifier& m = *bundle.model;
    ojson j;
    j["kind"] = m.kind();
    j["n_classes"] = m.n_classes();
    j["n_features"] = m.n_features();
    j["feature_names"] = bundle.feature_names;
    j["params"] = bundle.params;
    const std::string kind = m.kind();
    if (kind == "dt") {
        const auto& dt = dynamic_cast<const DecisionTreeModel&>(m);
        j["seed"] = dt.seed();
        j["model"] = TreeCodec::dump(dt);
    } else if (kind == "rf") {
        const auto& rf = dynamic_cast<const ForestModel&>(m);
        j["seed"] = rf.seed();
        j["model"] = TreeCodec::dump(rf);
    } else if (kind == "gb") {
        const auto& gb = dynamic_cast<const GbmModel&>(m);
        j["seed"] = gb.seed();
        j["model"] = TreeCodec::dump(gb);
    } else if (kind == "nb") {
        j["seed"] = 0;
        j["model"] = BaselineCodec::dump(dynamic_cast<const GaussianNbModel&>(m));
    } else if (kind == "lr") {
        j["seed"] = 0;
        j["model"] = BaselineCodec::dump(dynamic_cast<const LogisticModel&>(m));
    } else if (kind == "svm") {
        j["seed"] = 0;
        j["model"] = BaselineCodec::dump(dynamic_cast<const LinearSvmModel&>(m));
    }
    return j;
}

ModelBundle model_from_json(const ojson& j) {
    ModelBundle bundle;
    const auto kind = j.at("kind").get<std::string>();
    const int n_classes = j.at("n_classes").get<int>();
    const int n_features = j.at("n_features").get<int>();
    bundle.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    bundle.params = j.at("params");
    const auto seed = j.value("seed", std::uint64_t{0});
    const ojson& body = j.at("model");
    if (kind == "dt") {
        bundle.model = TreeCodec::load_tree(body, bundle.params, n_classes, n_features, seed);
    } else if (kind == "rf") {
        bundle.model = TreeCodec::load_forest(body, bundle.params, n_classes, n_features, seed);
    } else if (kind == "gb") {
        bundle.model = TreeCodec::load_gbm(body, bundle.params, n_classes, n_features, seed);
    } else if (kind == "nb") {
        bundle.model = BaselineCodec::load_nb(body, n_classes, n_features);
    } else if (kind == "lr") {
        bundle.model = BaselineCodec::load_lr(body, n_classes, n_features);
    } else if (kind == "svm") {
        bundle.model = BaselineCodec::load_svm(body, n_classes, n_features);
    } else {
        throw DataError("model file: unknown kind '" + kind + "'");
    }
    return bundle;
}

void save_model(const ModelBundle& bundle, const std::string& path) {
    write_json_file(model_to_json(bundle), path);
}

ModelBundle load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

void write_json_file(const ojson& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
}

ojson read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    try {
        return ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
}

} // namespace xmc
