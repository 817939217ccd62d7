#include "chainsift/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "chainsift/errors.hpp"
#include "chainsift/io_util.hpp"

namespace chainsift {

namespace {

using json = nlohmann::json;

json default_json() {
    return json{
        {"config_version", 1},
        {"inputs", {{"wallets", ""}, {"transfers", ""}, {"mixers", ""}}},
        {"output_dir", "out"},
        {"seed", 42},
        {"lenient_parse", false},
        {"threads", 0},
        {"split", {{"train", 0.70}, {"val", 0.15}, {"test", 0.15}}},
        {"folds", 3},
        {"profile", {{"skew_threshold", 2.0}, {"hist_bins", 30}}},
        {"features",
         {{"use_graph", true},
          {"use_transfers", true},
          {"frequency_window", 7 * 24 * 3600},
          {"large_pct", 90.0},
          {"small_pct", 10.0}}},
        {"models",
         {{"logistic", {{"learning_rate", 0.1}, {"l2", 1.0}, {"max_iters", 1000}, {"tol", 1e-6}}},
          {"forest",
           {{"n_trees", 100}, {"max_depth", 0}, {"min_leaf", 1}, {"features_per_split", "sqrt"}}},
          {"svm", {{"c", 1.0}, {"gamma", 0.0}, {"tol", 1e-3}, {"max_passes", 200}}}}},
        {"rules",
         {{"smurfing", {{"min_count", 10}, {"max_value", 0}, {"window", 3600}}},
          {"structuring", {{"threshold", 10000}, {"band_fraction", 0.05}, {"min_count", 3}}},
          {"fanout", {{"min_new", 10}, {"window", 24 * 3600}}},
          {"burst",
           {{"burst_count", 20}, {"burst_window", 24 * 3600}, {"dormancy_min", 14 * 24 * 3600}}},
          {"weights",
           {{"smurfing", 1.0},
            {"structuring", 1.0},
            {"mixer", 1.0},
            {"fanout", 1.0},
            {"burst", 1.0},
            {"neighbor", 1.0}}}}},
        {"fixture",
         {{"n_wallets", 1000},
          {"n_benign_transfers", 6000},
          {"planted",
           {{"smurfing", 50}, {"structuring", 50}, {"mixer", 50}, {"fanout", 50}, {"burst", 50}}}}}};
}

// Merge `user` over `base`, complaining about keys the schema does not know.
void merge_checked(json& base, const json& user, const std::string& prefix) {
    if (!user.is_object())
        throw ConfigError("config: expected object at '" + (prefix.empty() ? "." : prefix) + "'");
    for (const auto& [key, value] : user.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!base.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
        if (base[key].is_object())
            merge_checked(base[key], value, path);
        else
            base[key] = value;
    }
}

void apply_override(json& root, const std::string& key, const std::string& value) {
    json* at = &root;
    std::size_t start = 0;
    std::string path;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        path = path.empty() ? part : path + "." + part;
        if (!at->contains(part)) throw ConfigError("config: unknown key '" + path + "'");
        at = &(*at)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (at->is_object()) throw ConfigError("config: '" + key + "' is not a scalar");
    // Interpret as JSON when it parses (numbers, booleans), else raw string.
    json parsed = json::parse(value, nullptr, false);
    if (!parsed.is_discarded() && !parsed.is_object() && !parsed.is_array())
        *at = parsed;
    else
        *at = value;
}

template <typename T>
T get_at(const json& j, const char* a, const char* b, const std::string& what) {
    try {
        return j.at(a).at(b).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value at '" + std::string(a) + "." + b + "': " + e.what() +
                          " (" + what + ")");
    }
}

RunConfig from_json(const json& j) {
    RunConfig c;
    try {
        c.config_version = j.at("config_version").get<int>();
        c.wallets_path = get_at<std::string>(j, "inputs", "wallets", "path");
        c.transfers_path = get_at<std::string>(j, "inputs", "transfers", "path");
        c.mixers_path = get_at<std::string>(j, "inputs", "mixers", "path");
        c.output_dir = j.at("output_dir").get<std::string>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.lenient_parse = j.at("lenient_parse").get<bool>();
        c.threads = j.at("threads").get<int>();
        c.train_ratio = get_at<double>(j, "split", "train", "ratio");
        c.val_ratio = get_at<double>(j, "split", "val", "ratio");
        c.test_ratio = get_at<double>(j, "split", "test", "ratio");
        c.folds = j.at("folds").get<std::size_t>();
        c.skew_threshold = get_at<double>(j, "profile", "skew_threshold", "threshold");
        c.hist_bins = get_at<std::size_t>(j, "profile", "hist_bins", "count");

        const auto& f = j.at("features");
        c.use_graph = f.at("use_graph").get<bool>();
        c.use_transfers = f.at("use_transfers").get<bool>();
        c.features.frequency_window = f.at("frequency_window").get<std::int64_t>();
        c.features.large_pct = f.at("large_pct").get<double>();
        c.features.small_pct = f.at("small_pct").get<double>();

        const auto& lg = j.at("models").at("logistic");
        c.logistic.learning_rate = lg.at("learning_rate").get<double>();
        c.logistic.l2 = lg.at("l2").get<double>();
        c.logistic.max_iters = lg.at("max_iters").get<std::size_t>();
        c.logistic.tol = lg.at("tol").get<double>();

        const auto& fo = j.at("models").at("forest");
        c.forest.n_trees = fo.at("n_trees").get<std::size_t>();
        c.forest.max_depth = fo.at("max_depth").get<std::size_t>();
        c.forest.min_leaf = fo.at("min_leaf").get<std::size_t>();
        const auto fps = fo.at("features_per_split").get<std::string>();
        if (fps != "sqrt" && fps != "all")
            throw ConfigError("config: features_per_split must be 'sqrt' or 'all'");
        c.forest.features_per_split = fps == "all" ? SplitFeatures::All : SplitFeatures::Sqrt;

        const auto& sv = j.at("models").at("svm");
        c.svm.c = sv.at("c").get<double>();
        c.svm.gamma = sv.at("gamma").get<double>();
        c.svm.tol = sv.at("tol").get<double>();
        c.svm.max_passes = sv.at("max_passes").get<std::size_t>();

        const auto& ru = j.at("rules");
        c.rules.smurfing.min_count = ru.at("smurfing").at("min_count").get<std::size_t>();
        c.rules.smurfing.max_value = ru.at("smurfing").at("max_value").get<std::int64_t>();
        c.rules.smurfing.window = ru.at("smurfing").at("window").get<std::int64_t>();
        c.rules.structuring.threshold = ru.at("structuring").at("threshold").get<std::int64_t>();
        c.rules.structuring.band_fraction = ru.at("structuring").at("band_fraction").get<double>();
        c.rules.structuring.min_count = ru.at("structuring").at("min_count").get<std::size_t>();
        c.rules.fanout.min_new = ru.at("fanout").at("min_new").get<std::size_t>();
        c.rules.fanout.window = ru.at("fanout").at("window").get<std::int64_t>();
        c.rules.burst.burst_count = ru.at("burst").at("burst_count").get<std::size_t>();
        c.rules.burst.burst_window = ru.at("burst").at("burst_window").get<std::int64_t>();
        c.rules.burst.dormancy_min = ru.at("burst").at("dormancy_min").get<std::int64_t>();
        const auto& w = ru.at("weights");
        c.rules.weights.smurfing = w.at("smurfing").get<double>();
        c.rules.weights.structuring = w.at("structuring").get<double>();
        c.rules.weights.mixer = w.at("mixer").get<double>();
        c.rules.weights.fanout = w.at("fanout").get<double>();
        c.rules.weights.burst = w.at("burst").get<double>();
        c.rules.weights.neighbor = w.at("neighbor").get<double>();

        const auto& fx = j.at("fixture");
        c.fixture.n_wallets = fx.at("n_wallets").get<std::size_t>();
        c.fixture.n_benign_transfers = fx.at("n_benign_transfers").get<std::size_t>();
        const auto& pl = fx.at("planted");
        c.fixture.planted.smurfing = pl.at("smurfing").get<std::size_t>();
        c.fixture.planted.structuring = pl.at("structuring").get<std::size_t>();
        c.fixture.planted.mixer = pl.at("mixer").get<std::size_t>();
        c.fixture.planted.fanout = pl.at("fanout").get<std::size_t>();
        c.fixture.planted.burst = pl.at("burst").get<std::size_t>();
        c.fixture.seed = c.seed;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (c.config_version != 1) throw ConfigError("config: unsupported config_version");
    if (std::abs(c.train_ratio + c.val_ratio + c.test_ratio - 1.0) > 1e-9)
        throw ConfigError("config: ratios must sum to 1");
    if (c.threads < 0) throw ConfigError("config: threads must be >= 0");
    return c;
}

}  // namespace

RunConfig load_run_config(const std::string& json_text,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
    json user = json::parse(json_text, nullptr, false);
    if (user.is_discarded()) throw ConfigError("config: not valid JSON");
    json merged = default_json();
    merge_checked(merged, user, "");
    for (const auto& [key, value] : overrides) apply_override(merged, key, value);
    return from_json(merged);
}

RunConfig load_run_config_file(const std::string& path,
                               const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const InputError& e) {
        // A missing config file is a configuration problem, not a data one.
        throw ConfigError(e.what());
    }
    return load_run_config(text, overrides);
}

std::string config_to_json(const RunConfig& c) {
    json j = default_json();
    j["config_version"] = c.config_version;
    j["inputs"] = {{"wallets", c.wallets_path},
                   {"transfers", c.transfers_path},
                   {"mixers", c.mixers_path}};
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["lenient_parse"] = c.lenient_parse;
    j["threads"] = c.threads;
    j["split"] = {{"train", c.train_ratio}, {"val", c.val_ratio}, {"test", c.test_ratio}};
    j["folds"] = c.folds;
    j["profile"] = {{"skew_threshold", c.skew_threshold}, {"hist_bins", c.hist_bins}};
    j["features"] = {{"use_graph", c.use_graph},
                     {"use_transfers", c.use_transfers},
                     {"frequency_window", c.features.frequency_window},
                     {"large_pct", c.features.large_pct},
                     {"small_pct", c.features.small_pct}};
    j["models"]["logistic"] = {{"learning_rate", c.logistic.learning_rate},
                               {"l2", c.logistic.l2},
                               {"max_iters", c.logistic.max_iters},
                               {"tol", c.logistic.tol}};
    j["models"]["forest"] = {
        {"n_trees", c.forest.n_trees},
        {"max_depth", c.forest.max_depth},
        {"min_leaf", c.forest.min_leaf},
        {"features_per_split",
         c.forest.features_per_split == SplitFeatures::All ? "all" : "sqrt"}};
    j["models"]["svm"] = {{"c", c.svm.c},
                          {"gamma", c.svm.gamma},
                          {"tol", c.svm.tol},
                          {"max_passes", c.svm.max_passes}};
    j["rules"] = {{"smurfing",
                   {{"min_count", c.rules.smurfing.min_count},
                    {"max_value", c.rules.smurfing.max_value},
                    {"window", c.rules.smurfing.window}}},
                  {"structuring",
                   {{"threshold", c.rules.structuring.threshold},
                    {"band_fraction", c.rules.structuring.band_fraction},
                    {"min_count", c.rules.structuring.min_count}}},
                  {"fanout",
                   {{"min_new", c.rules.fanout.min_new}, {"window", c.rules.fanout.window}}},
                  {"burst",
                   {{"burst_count", c.rules.burst.burst_count},
                    {"burst_window", c.rules.burst.burst_window},
                    {"dormancy_min", c.rules.burst.dormancy_min}}},
                  {"weights",
                   {{"smurfing", c.rules.weights.smurfing},
                    {"structuring", c.rules.weights.structuring},
                    {"mixer", c.rules.weights.mixer},
                    {"fanout", c.rules.weights.fanout},
                    {"burst", c.rules.weights.burst},
                    {"neighbor", c.rules.weights.neighbor}}}};
    j["fixture"] = {{"n_wallets", c.fixture.n_wallets},
                    {"n_benign_transfers", c.fixture.n_benign_transfers},
                    {"planted",
                     {{"smurfing", c.fixture.planted.smurfing},
                      {"structuring", c.fixture.planted.structuring},
                      {"mixer", c.fixture.planted.mixer},
                      {"fanout", c.fixture.planted.fanout},
                      {"burst", c.fixture.planted.burst}}}};
    return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config) {
    return to_hex(hash_bytes(config_to_json(config)));
}

}  // namespace chainsift
