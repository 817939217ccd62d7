#include <stdexcept>

#include <json.hpp>

#include "chainsift/learn.hpp"

namespace chainsift {

namespace {

using json = nlohmann::json;

constexpr int kFormatVersion = 1;

json logistic_to_json(const LogisticModel& m) {
    return json{{"format_version", kFormatVersion},
                {"kind", "logistic"},
                {"seed", m.seed},
                {"config",
                 {{"learning_rate", m.config.learning_rate},
                  {"l2", m.config.l2},
                  {"max_iters", m.config.max_iters},
                  {"tol", m.config.tol}}},
                {"params",
                 {{"weights", m.weights},
                  {"bias", m.bias},
                  {"iterations", m.iterations},
                  {"final_loss", m.final_loss},
                  {"converged", m.converged}}}};
}

json forest_to_json(const ForestModel& m) {
    json trees = json::array();
    for (const auto& tree : m.trees) {
        json nodes = json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.counts[0], n.counts[1]});
        trees.push_back(std::move(nodes));
    }
    return json{{"format_version", kFormatVersion},
                {"kind", "forest"},
                {"seed", m.seed},
                {"config",
                 {{"n_trees", m.config.n_trees},
                  {"max_depth", m.config.max_depth},
                  {"min_leaf", m.config.min_leaf},
                  {"features_per_split",
                   m.config.features_per_split == SplitFeatures::Sqrt ? "sqrt" : "all"}}},
                {"params", {{"n_features", m.n_features}, {"trees", std::move(trees)}}}};
}

json svm_to_json(const SvmModel& m) {
    return json{{"format_version", kFormatVersion},
                {"kind", "svm"},
                {"seed", m.seed},
                {"config",
                 {{"c", m.config.c},
                  {"gamma", m.config.gamma},  // <= 0 means the scale rule
                  {"tol", m.config.tol},
                  {"max_passes", m.config.max_passes}}},
                {"params",
                 {{"n_features", m.n_features},
                  {"gamma", m.gamma},
                  {"bias", m.bias},
                  {"converged", m.converged},
                  {"passes", m.passes},
                  {"max_kkt_violation", m.max_kkt_violation},
                  {"support_vectors", m.support_vectors},
                  {"coeffs", m.coeffs}}}};
}

LogisticModel logistic_from_json(const json& j) {
    LogisticModel m;
    const auto& c = j.at("config");
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.l2 = c.at("l2").get<double>();
    m.config.max_iters = c.at("max_iters").get<std::size_t>();
    m.config.tol = c.at("tol").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    m.weights = p.at("weights").get<std::vector<double>>();
    m.bias = p.at("bias").get<double>();
    m.iterations = p.at("iterations").get<std::size_t>();
    m.final_loss = p.at("final_loss").get<double>();
    m.converged = p.at("converged").get<bool>();
    return m;
}

ForestModel forest_from_json(const json& j) {
    ForestModel m;
    const auto& c = j.at("config");
    m.config.n_trees = c.at("n_trees").get<std::size_t>();
    m.config.max_depth = c.at("max_depth").get<std::size_t>();
    m.config.min_leaf = c.at("min_leaf").get<std::size_t>();
    m.config.features_per_split = c.at("features_per_split").get<std::string>() == "all"
                                      ? SplitFeatures::All
                                      : SplitFeatures::Sqrt;
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    m.n_features = p.at("n_features").get<std::size_t>();
    for (const auto& jt : p.at("trees")) {
        DecisionTree tree;
        for (const auto& jn : jt) {
            DecisionTree::Node n;
            n.feature = jn.at(0).get<int>();
            n.threshold = jn.at(1).get<double>();
            n.left = jn.at(2).get<int>();
            n.right = jn.at(3).get<int>();
            n.counts = {jn.at(4).get<std::int64_t>(), jn.at(5).get<std::int64_t>()};
            tree.nodes.push_back(n);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

SvmModel svm_from_json(const json& j) {
    SvmModel m;
    const auto& c = j.at("config");
    m.config.c = c.at("c").get<double>();
    m.config.gamma = c.at("gamma").get<double>();
    m.config.tol = c.at("tol").get<double>();
    m.config.max_passes = c.at("max_passes").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    m.n_features = p.at("n_features").get<std::size_t>();
    m.gamma = p.at("gamma").get<double>();
    m.bias = p.at("bias").get<double>();
    m.converged = p.at("converged").get<bool>();
    m.passes = p.at("passes").get<std::size_t>();
    m.max_kkt_violation = p.at("max_kkt_violation").get<double>();
    m.support_vectors = p.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.coeffs = p.at("coeffs").get<std::vector<double>>();
    return m;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Logistic: return "logistic";
        case ModelKind::Forest: return "forest";
        case ModelKind::Svm: return "svm";
    }
    return "logistic";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "logistic") return ModelKind::Logistic;
    if (s == "forest") return ModelKind::Forest;
    if (s == "svm") return ModelKind::Svm;
    throw std::invalid_argument("unknown model kind '" + s + "'");
}

std::string model_to_json(const TrainedModel& m) {
    json j = std::visit(
        [](const auto& model) -> json {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, LogisticModel>) return logistic_to_json(model);
            if constexpr (std::is_same_v<T, ForestModel>) return forest_to_json(model);
            if constexpr (std::is_same_v<T, SvmModel>) return svm_to_json(model);
        },
        m);
    return j.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format_version").get<int>() != kFormatVersion)
        throw std::invalid_argument("unsupported model format_version");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "logistic") return logistic_from_json(j);
    if (kind == "forest") return forest_from_json(j);
    if (kind == "svm") return svm_from_json(j);
    throw std::invalid_argument("unknown model kind '" + kind + "'");
}

TrainedModel train_model(const FeatureMatrix& X, const std::vector<int>& y,
                         const ModelConfig& config, int threads) {
    switch (config.kind) {
        case ModelKind::Logistic: return train_logistic(X, y, config.logistic, config.seed);
        case ModelKind::Forest:
            return train_random_forest(X, y, config.forest, config.seed, threads);
        case ModelKind::Svm: return train_svm(X, y, config.svm, config.seed);
    }
    throw std::invalid_argument("train_model: bad kind");
}

std::vector<int> predict_labels(const TrainedModel& m, const FeatureMatrix& X) {
    return std::visit([&](const auto& model) { return predict_labels(model, X); }, m);
}

std::vector<double> decision_scores(const TrainedModel& m, const FeatureMatrix& X) {
    return std::visit([&](const auto& model) { return decision_scores(model, X); }, m);
}

}  // namespace chainsift
