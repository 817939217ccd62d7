#include "chainsift/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "chainsift/errors.hpp"
#include "chainsift/eval.hpp"
#include "chainsift/io_util.hpp"
#include "chainsift/profile.hpp"

namespace chainsift {

namespace {

namespace fs = std::filesystem;

constexpr const char* kNumericColumns[5] = {"n_tx", "n_unredeemed", "total_received",
                                            "total_sent", "final_balance"};

struct PipelineState {
    const RunConfig& cfg;
    std::vector<std::string> artifacts;  // relative paths written so far
    std::optional<std::string> winner;

    // Lazily loaded/derived shared data.
    std::optional<std::vector<WalletRecord>> wallets;
    std::optional<CleanReport> clean_report;
    std::optional<std::vector<TransferRecord>> transfers;
    std::optional<std::set<std::string>> mixers;
    std::optional<TransactionGraph> graph;
    std::optional<CentralityBundle> centralities;
    std::optional<FeatureMatrix> matrix;
};

void write_artifact(PipelineState& st, const std::string& relpath, std::string_view content) {
    const fs::path full = fs::path(st.cfg.output_dir) / relpath;
    std::error_code ec;
    fs::create_directories(full.parent_path(), ec);
    if (ec) throw PipelineError("cannot create directory: " + full.parent_path().string());
    write_file(full.string(), content);
    st.artifacts.push_back(relpath);
}

Format detect_format(const std::string& path) {
    return path.size() >= 6 && path.ends_with(".jsonl") ? Format::Jsonl : Format::Csv;
}

void log_stage(const std::string& line) { std::cout << "[chainsift] " << line << "\n"; }

// ---- input loading ---------------------------------------------------------

const std::vector<WalletRecord>& wallets_of(PipelineState& st) {
    if (st.wallets) return *st.wallets;
    if (st.cfg.wallets_path.empty()) throw InputError("no wallet input configured");
    if (!fs::exists(st.cfg.wallets_path))
        throw InputError("missing wallet input: " + st.cfg.wallets_path);
    std::ifstream in(st.cfg.wallets_path, std::ios::binary);
    if (!in) throw InputError("cannot open wallet input: " + st.cfg.wallets_path);
    std::vector<RowIssue> issues;
    std::vector<WalletRecord> raw;
    try {
        raw = parse_wallet_records(in, detect_format(st.cfg.wallets_path),
                                   st.cfg.lenient_parse ? ParseMode::Lenient : ParseMode::Strict,
                                   &issues);
    } catch (const ParseError& e) {
        throw InputError("wallet input: " + std::string(e.what()));
    }
    for (const auto& issue : issues)
        std::cerr << "chainsift: warning: wallet input " << issue.message << "\n";
    auto [cleaned, report] = clean_records(raw);
    st.wallets = std::move(cleaned);
    st.clean_report = report;
    return *st.wallets;
}

const std::vector<TransferRecord>* transfers_of(PipelineState& st) {
    if (st.transfers) return &*st.transfers;
    if (st.cfg.transfers_path.empty()) return nullptr;
    if (!fs::exists(st.cfg.transfers_path))
        throw InputError("missing transfer input: " + st.cfg.transfers_path);
    std::ifstream in(st.cfg.transfers_path, std::ios::binary);
    if (!in) throw InputError("cannot open transfer input: " + st.cfg.transfers_path);
    std::vector<RowIssue> issues;
    try {
        st.transfers = parse_transfer_log(
            in, detect_format(st.cfg.transfers_path),
            st.cfg.lenient_parse ? ParseMode::Lenient : ParseMode::Strict, &issues);
    } catch (const ParseError& e) {
        throw InputError("transfer input: " + std::string(e.what()));
    }
    for (const auto& issue : issues)
        std::cerr << "chainsift: warning: transfer input " << issue.message << "\n";
    return &*st.transfers;
}

const std::set<std::string>& mixers_of(PipelineState& st) {
    if (!st.mixers) {
        st.mixers.emplace();
        if (!st.cfg.mixers_path.empty()) {
            if (!fs::exists(st.cfg.mixers_path))
                throw InputError("missing mixer list: " + st.cfg.mixers_path);
            std::ifstream in(st.cfg.mixers_path);
            if (!in) throw InputError("cannot open mixer list: " + st.cfg.mixers_path);
            std::string line;
            while (std::getline(in, line)) {
                auto addr = trim(line);
                if (!addr.empty()) st.mixers->insert(std::string(addr));
            }
        }
    }
    return *st.mixers;
}

// ---- derived shared state --------------------------------------------------

const CentralityBundle* centralities_of(PipelineState& st) {
    if (!st.cfg.use_graph) return nullptr;
    const auto* transfers = transfers_of(st);
    if (!transfers || transfers->empty()) return nullptr;
    if (!st.centralities) {
        st.graph = build_graph(*transfers);
        if (st.graph->node_count() < 2) return nullptr;
        CentralityBundle b;
        b.degree = degree_centrality(*st.graph);
        b.closeness = closeness_centrality(*st.graph, st.cfg.threads);
        b.betweenness = betweenness_centrality(*st.graph, st.cfg.threads);
        st.centralities = std::move(b);
    }
    return &*st.centralities;
}

const FeatureMatrix& matrix_of(PipelineState& st) {
    if (!st.matrix) {
        const auto& wallets = wallets_of(st);
        const auto* transfers = st.cfg.use_transfers ? transfers_of(st) : nullptr;
        if (transfers && transfers->empty()) transfers = nullptr;
        st.matrix = assemble_features(wallets, transfers, centralities_of(st), st.cfg.features,
                                      st.cfg.threads);
    }
    return *st.matrix;
}

std::vector<int> labels_of(PipelineState& st) {
    const auto& m = matrix_of(st);
    if (!m.labels) throw PipelineError("wallet records carry no labels; cannot train/evaluate");
    return *m.labels;
}

struct TrainedSet {
    SplitIndices split;
    StandardizerStats scaler;  // fit on the training rows only
    LogisticModel logistic;
    ForestModel forest;
    SvmModel svm;
};

FeatureMatrix take_rows(const FeatureMatrix& X, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.column_names = X.column_names;
    for (std::size_t r : rows) {
        out.row_ids.push_back(X.row_ids[r]);
        out.values.push_back(X.values[r]);
    }
    return out;
}

std::vector<int> take_at(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    for (std::size_t r : rows) out.push_back(y[r]);
    return out;
}

const TrainedSet& trained_of(PipelineState& st, std::optional<TrainedSet>& cache) {
    if (cache) return *cache;
    const auto& X = matrix_of(st);
    const auto y = labels_of(st);

    TrainedSet ts;
    try {
        ts.split = stratified_split(y, st.cfg.train_ratio, st.cfg.val_ratio, st.cfg.test_ratio,
                                    st.cfg.seed);
        const auto Xtr_raw = take_rows(X, ts.split.train);
        const auto ytr = take_at(y, ts.split.train);
        ts.scaler = fit_standardizer(Xtr_raw);
        const auto Xtr = apply_standardizer(Xtr_raw, ts.scaler);

        log_stage("train: logistic regression");
        ts.logistic = train_logistic(Xtr, ytr, st.cfg.logistic, st.cfg.seed);
        log_stage("train: random forest (" + std::to_string(st.cfg.forest.n_trees) + " trees)");
        ts.forest = train_random_forest(Xtr_raw, ytr, st.cfg.forest, st.cfg.seed, st.cfg.threads);
        log_stage("train: svm (smo)");
        ts.svm = train_svm(Xtr, ytr, st.cfg.svm, st.cfg.seed);
        if (!ts.svm.converged)
            std::cerr << "chainsift: warning: svm did not converge (max KKT violation "
                      << fmt_double(ts.svm.max_kkt_violation) << ")\n";
    } catch (const std::invalid_argument& e) {
        throw PipelineError(e.what());
    }
    cache = std::move(ts);
    return *cache;
}

// Test-split predictions per model, in a fixed (name, pred, scores) order.
struct Predictions {
    std::vector<int> y_test;
    std::vector<std::tuple<std::string, std::vector<int>, std::vector<double>>> per_model;
};

Predictions predict_test(PipelineState& st, const TrainedSet& ts) {
    const auto& X = matrix_of(st);
    const auto y = labels_of(st);
    Predictions p;
    p.y_test = take_at(y, ts.split.test);
    const auto Xte_raw = take_rows(X, ts.split.test);
    const auto Xte = apply_standardizer(Xte_raw, ts.scaler);
    p.per_model.emplace_back("Logistic Regression", predict_labels(ts.logistic, Xte),
                             decision_scores(ts.logistic, Xte));
    p.per_model.emplace_back("Random Forest", predict_labels(ts.forest, Xte_raw),
                             decision_scores(ts.forest, Xte_raw));
    p.per_model.emplace_back("SVM", predict_labels(ts.svm, Xte), decision_scores(ts.svm, Xte));
    return p;
}

std::string model_slug(const std::string& name) {
    if (name == "Logistic Regression") return "logistic";
    if (name == "Random Forest") return "forest";
    return "svm";
}

// ---- stages ----------------------------------------------------------------

void stage_ingest(PipelineState& st) {
    const auto& wallets = wallets_of(st);
    write_artifact(st, "clean/wallets.csv", to_csv(wallets));
    const auto& rep = *st.clean_report;
    nlohmann::json j{{"rows_in", rep.rows_in},
                     {"rows_dropped_missing", rep.rows_dropped_missing},
                     {"rows_dropped_duplicate", rep.rows_dropped_duplicate},
                     {"rows_out", rep.rows_out},
                     {"soft_violations", rep.soft_violations}};
    write_artifact(st, "clean/clean_report.json", j.dump(2) + "\n");
    if (const auto* transfers = transfers_of(st))
        write_artifact(st, "clean/transfers.csv", to_csv(*transfers));
    log_stage("ingest: " + std::to_string(rep.rows_in) + " rows in, " +
              std::to_string(rep.rows_out) + " out, " + std::to_string(rep.soft_violations) +
              " soft violations");
}

void stage_profile(PipelineState& st) {
    const auto& wallets = wallets_of(st);
    if (wallets.size() < 2) throw PipelineError("profile: need at least 2 wallet rows");
    const std::size_t artifacts_before = st.artifacts.size();

    std::vector<std::vector<double>> columns(5);
    for (const auto& r : wallets) {
        columns[0].push_back(static_cast<double>(r.n_tx));
        columns[1].push_back(static_cast<double>(r.n_unredeemed));
        columns[2].push_back(static_cast<double>(r.total_received));
        columns[3].push_back(static_cast<double>(r.total_sent));
        columns[4].push_back(static_cast<double>(r.final_balance));
    }
    std::vector<std::string> names(std::begin(kNumericColumns), std::end(kNumericColumns));

    // stats.csv carries the per-column summary plus the skew/zero-variance
    // flags the other artifacts rely on.
    std::ostringstream stats;
    stats << "column,mean,median,variance,skewness,min,max,skewed,zero_variance\n";
    std::vector<bool> skewed(5, false);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto s = summary_stats(columns[i]);
        skewed[i] = std::abs(s.skewness) > st.cfg.skew_threshold;
        stats << names[i] << ',' << fmt_double(s.mean) << ',' << fmt_double(s.median) << ','
              << fmt_double(s.variance) << ',' << fmt_double(s.skewness) << ','
              << fmt_double(s.min) << ',' << fmt_double(s.max) << ',' << (skewed[i] ? 1 : 0)
              << ',' << (s.variance == 0 ? 1 : 0) << '\n';
    }
    write_artifact(st, "profile/stats.csv", stats.str());

    write_artifact(st, "profile/corr.csv", corr_csv(correlation_matrix(names, columns)));
    write_artifact(st, "profile/topk_total_received.csv",
                   topk_csv(top_k_by_field(wallets, "total_received", 10)));
    write_artifact(st, "profile/topk_total_sent.csv",
                   topk_csv(top_k_by_field(wallets, "total_sent", 10)));

    for (std::size_t i = 0; i < 5; ++i) {
        write_artifact(st, "profile/hist_" + names[i] + ".csv",
                       hist_csv(histogram(columns[i], st.cfg.hist_bins)));
        if (skewed[i])
            write_artifact(st, "profile/hist_log1p_" + names[i] + ".csv",
                           hist_csv(histogram(log1p_column(columns[i]), st.cfg.hist_bins)));
    }

    // Activity intensity ranking (intensity = n_tx / (total_received + 1)).
    std::vector<double> intensity;
    intensity.reserve(wallets.size());
    for (const auto& r : wallets) intensity.push_back(activity_intensity(r.n_tx, r.total_received));
    const auto ranks = rank_descending(intensity);
    std::ostringstream act;
    act << "address,activity_intensity,rank\n";
    for (std::size_t i = 0; i < wallets.size(); ++i)
        act << wallets[i].address << ',' << fmt_double(intensity[i]) << ',' << fmt_double(ranks[i])
            << '\n';
    write_artifact(st, "profile/activity.csv", act.str());

    if (summary_stats(columns[1]).variance > 0)
        write_artifact(st, "profile/fit.csv", fit_csv(linear_fit(columns[1], columns[4])));
    write_artifact(st, "profile/scatter.csv", scatter_csv(wallets));
    log_stage("profile: " + std::to_string(st.artifacts.size() - artifacts_before) +
              " artifacts");
}

void stage_featurize(PipelineState& st) {
    const auto& m = matrix_of(st);
    write_artifact(st, "features/features.csv", features_csv(m));
    write_artifact(st, "features/manifest.json", feature_manifest_json(m));
    if (const auto* c = centralities_of(st)) {
        write_artifact(st, "features/degree.csv", scores_csv(c->degree));
        write_artifact(st, "features/closeness.csv", scores_csv(c->closeness));
        write_artifact(st, "features/betweenness.csv", scores_csv(c->betweenness));
    }
    log_stage("featurize: " + std::to_string(m.rows()) + " rows x " + std::to_string(m.cols()) +
              " columns");
}

void stage_train(PipelineState& st, std::optional<TrainedSet>& cache) {
    const auto& ts = trained_of(st, cache);
    write_artifact(st, "models/logistic.json", model_to_json(TrainedModel{ts.logistic}));
    write_artifact(st, "models/forest.json", model_to_json(TrainedModel{ts.forest}));
    write_artifact(st, "models/svm.json", model_to_json(TrainedModel{ts.svm}));
    nlohmann::json scaler{{"mean", ts.scaler.mean}, {"stddev", ts.scaler.stddev}};
    write_artifact(st, "models/standardizer.json", scaler.dump(2) + "\n");
}

void stage_evaluate(PipelineState& st, std::optional<TrainedSet>& cache) {
    const auto& ts = trained_of(st, cache);
    const auto preds = predict_test(st, ts);

    for (const auto& [name, pred, scores] : preds.per_model) {
        const auto cm = confusion(preds.y_test, pred);
        const auto report = report_from_confusion(cm);
        const double auc = roc_auc(preds.y_test, scores);
        const auto slug = model_slug(name);
        write_artifact(st, "reports/" + slug + ".json", report_json(name, cm, report, auc));
        write_artifact(st, "reports/" + slug + ".txt", render_report_text(report));
    }

    if (st.cfg.folds >= 2) {
        const auto& X = matrix_of(st);
        const auto y = labels_of(st);
        const auto Xtr = take_rows(X, ts.split.train);
        const auto ytr = take_at(y, ts.split.train);
        for (ModelKind kind : {ModelKind::Logistic, ModelKind::Forest, ModelKind::Svm}) {
            ModelConfig mc;
            mc.kind = kind;
            mc.seed = st.cfg.seed;
            mc.logistic = st.cfg.logistic;
            mc.forest = st.cfg.forest;
            mc.svm = st.cfg.svm;
            log_stage("evaluate: " + std::to_string(st.cfg.folds) + "-fold cv, " + to_string(kind));
            CvResult cv;
            try {
                cv = cross_validate(Xtr, ytr, mc, st.cfg.folds, st.cfg.seed, st.cfg.threads);
            } catch (const std::exception& e) {
                throw PipelineError(e.what());
            }
            nlohmann::json j;
            j["model"] = to_string(kind);
            j["folds"] = st.cfg.folds;
            auto stats = [](const CvMetrics& m) {
                return nlohmann::json{{"accuracy", m.accuracy},
                                      {"precision", m.precision},
                                      {"recall", m.recall},
                                      {"f1", m.f1},
                                      {"auc", m.auc}};
            };
            j["mean"] = stats(cv.mean);
            j["stddev"] = stats(cv.stddev);
            write_artifact(st, "reports/cv_" + to_string(kind) + ".json", j.dump(2) + "\n");
        }
    }
}

void stage_compare(PipelineState& st, std::optional<TrainedSet>& cache) {
    const auto& ts = trained_of(st, cache);
    const auto preds = predict_test(st, ts);
    std::vector<std::tuple<std::string, std::vector<int>, std::vector<int>>> results;
    for (const auto& [name, pred, scores] : preds.per_model)
        results.emplace_back(name, preds.y_test, pred);
    const auto rows = compare_models(results);
    write_artifact(st, "reports/comparison.csv", comparison_csv(rows));
    st.winner = rows.front().model;
    log_stage("compare: best model by F1 is " + rows.front().model);
}

void stage_scan(PipelineState& st) {
    const auto* transfers = transfers_of(st);
    if (!transfers) throw InputError("scan: no transfer input configured");
    const auto alerts = scan_all(*transfers, mixers_of(st), st.cfg.rules, st.cfg.threads);
    write_artifact(st, "alerts/alerts.jsonl", alerts_jsonl(alerts));

    // Risk profiles for the wallet population; alerted wallets double as the
    // flagged set for the neighbor term.
    const auto& wallets = wallets_of(st);
    std::set<std::string> flagged;
    for (const auto& a : alerts) flagged.insert(a.wallet);
    const auto graph = build_graph(*transfers);
    std::vector<RiskProfile> profiles;
    profiles.reserve(wallets.size());
    for (const auto& w : wallets)
        profiles.push_back(wallet_risk_score(w.address, alerts, graph, flagged,
                                             st.cfg.rules.weights));
    std::stable_sort(profiles.begin(), profiles.end(),
                     [](const RiskProfile& a, const RiskProfile& b) { return a.score > b.score; });
    write_artifact(st, "alerts/risk.csv", risk_csv(profiles));

    // Rule outcomes as a label column, ready to feed back into training.
    std::vector<WalletRecord> labeled = wallets;
    for (auto& w : labeled) w.label = flagged.count(w.address) ? 1 : 0;
    write_artifact(st, "alerts/labeled_wallets.csv", to_csv(labeled));

    log_stage("scan: " + std::to_string(alerts.size()) + " alerts over " +
              std::to_string(flagged.size()) + " wallets");
}

void stage_fixture(PipelineState& st) {
    FixtureParams params = st.cfg.fixture;
    params.seed = st.cfg.seed;
    Fixture fx;
    try {
        fx = generate_fixture(params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    write_artifact(st, "fixture/wallets.csv", to_csv(fx.records));
    write_artifact(st, "fixture/transfers.csv", to_csv(fx.transfers));
    std::ostringstream mixers;
    for (const auto& m : fx.mixers) mixers << m << '\n';
    write_artifact(st, "fixture/mixers.txt", mixers.str());
    nlohmann::json truth;
    for (const auto& [rule, addrs] : fx.planted) truth[to_string(rule)] = addrs;
    write_artifact(st, "fixture/truth.json", truth.dump(2) + "\n");
    log_stage("fixture: " + std::to_string(fx.records.size()) + " wallets, " +
              std::to_string(fx.transfers.size()) + " transfers");
}

void write_manifest(PipelineState& st, Command command) {
    std::sort(st.artifacts.begin(), st.artifacts.end());
    nlohmann::json j;
    j["command"] = static_cast<int>(command);
    j["config_version"] = st.cfg.config_version;
    j["config_hash"] = config_hash(st.cfg);
    j["artifacts"] = st.artifacts;
    if (st.winner) j["best_model"] = *st.winner;
    const fs::path path = fs::path(st.cfg.output_dir) / "manifest.json";
    std::error_code ec;
    fs::create_directories(st.cfg.output_dir, ec);
    write_file(path.string(), j.dump(2) + "\n");
}

}  // namespace

Command command_from_string(const std::string& s) {
    if (s == "ingest") return Command::Ingest;
    if (s == "profile") return Command::Profile;
    if (s == "featurize") return Command::Featurize;
    if (s == "train") return Command::Train;
    if (s == "evaluate") return Command::Evaluate;
    if (s == "compare") return Command::Compare;
    if (s == "scan") return Command::Scan;
    if (s == "fixture") return Command::Fixture;
    if (s == "all") return Command::All;
    throw ConfigError("unknown command '" + s + "'");
}

namespace {

// Referenced inputs must exist before any artifact is written.
void validate_inputs(Command command, const RunConfig& config) {
    if (command == Command::Fixture) return;
    if (config.wallets_path.empty()) throw InputError("no wallet input configured");
    if (!fs::exists(config.wallets_path))
        throw InputError("missing wallet input: " + config.wallets_path);
    if (command == Command::Scan && config.transfers_path.empty())
        throw InputError("scan: no transfer input configured");
    if (!config.transfers_path.empty() && !fs::exists(config.transfers_path))
        throw InputError("missing transfer input: " + config.transfers_path);
    if (!config.mixers_path.empty() && !fs::exists(config.mixers_path))
        throw InputError("missing mixer list: " + config.mixers_path);
}

}  // namespace

void run_command(Command command, const RunConfig& config) {
    validate_inputs(command, config);
    PipelineState st{config, {}, {}, {}, {}, {}, {}, {}, {}, {}};
    std::optional<TrainedSet> trained;

    switch (command) {
        case Command::Ingest: stage_ingest(st); break;
        case Command::Profile: stage_profile(st); break;
        case Command::Featurize: stage_featurize(st); break;
        case Command::Train: stage_train(st, trained); break;
        case Command::Evaluate: stage_evaluate(st, trained); break;
        case Command::Compare: stage_compare(st, trained); break;
        case Command::Scan: stage_scan(st); break;
        case Command::Fixture: stage_fixture(st); break;
        case Command::All:
            stage_ingest(st);
            stage_profile(st);
            stage_featurize(st);
            stage_train(st, trained);
            stage_evaluate(st, trained);
            stage_compare(st, trained);
            if (!config.transfers_path.empty()) stage_scan(st);
            break;
    }
    write_manifest(st, command);
}

}  // namespace chainsift
