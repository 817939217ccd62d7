#include "chainsift/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chainsift/rng.hpp"

namespace chainsift {

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size()) throw std::invalid_argument("confusion: length mismatch");
    if (y_true.empty()) throw std::invalid_argument("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1)
            (y_pred[i] == 1 ? cm.tp : cm.fn)++;
        else
            (y_pred[i] == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.fp < 0 || cm.fn < 0 || cm.tn < 0)
        throw std::invalid_argument("metrics_from_confusion: negative count");
    if (cm.total() <= 0) throw std::invalid_argument("metrics_from_confusion: empty matrix");
    Metrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    m.precision = cm.tp + cm.fp > 0
                      ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp)
                      : 0.0;
    m.recall = cm.tp + cm.fn > 0
                   ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn)
                   : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
    return m;
}

ClassReport report_from_confusion(const ConfusionMatrix& cm) {
    const Metrics m1 = metrics_from_confusion(cm);
    // Class 0 is the positive class of the transposed matrix.
    const Metrics m0 = metrics_from_confusion({cm.tn, cm.fn, cm.fp, cm.tp});

    ClassReport r;
    r.class1 = {m1.precision, m1.recall, m1.f1, cm.tp + cm.fn};
    r.class0 = {m0.precision, m0.recall, m0.f1, cm.tn + cm.fp};
    r.accuracy = m1.accuracy;
    r.macro = {(m0.precision + m1.precision) / 2.0, (m0.recall + m1.recall) / 2.0,
               (m0.f1 + m1.f1) / 2.0};
    const double n = static_cast<double>(cm.total());
    const double w0 = static_cast<double>(r.class0.support) / n;
    const double w1 = static_cast<double>(r.class1.support) / n;
    r.weighted = {w0 * m0.precision + w1 * m1.precision, w0 * m0.recall + w1 * m1.recall,
                  w0 * m0.f1 + w1 * m1.f1};
    return r;
}

ClassReport classification_report(const std::vector<int>& y_true,
                                  const std::vector<int>& y_pred) {
    return report_from_confusion(confusion(y_true, y_pred));
}

std::string render_report_text(const ClassReport& r) {
    char buf[128];
    std::ostringstream ss;
    ss << "              precision    recall  f1-score   support\n\n";
    auto row = [&](const char* name, double p, double rec, double f1, std::int64_t support) {
        std::snprintf(buf, sizeof(buf), "%12s %10.2f %9.2f %9.2f %9lld\n", name, p, rec, f1,
                      static_cast<long long>(support));
        ss << buf;
    };
    row("0", r.class0.precision, r.class0.recall, r.class0.f1, r.class0.support);
    row("1", r.class1.precision, r.class1.recall, r.class1.f1, r.class1.support);
    const std::int64_t n = r.class0.support + r.class1.support;
    ss << '\n';
    std::snprintf(buf, sizeof(buf), "%12s %10s %9s %9.2f %9lld\n", "accuracy", "", "", r.accuracy,
                  static_cast<long long>(n));
    ss << buf;
    row("macro avg", r.macro.precision, r.macro.recall, r.macro.f1, n);
    row("weighted avg", r.weighted.precision, r.weighted.recall, r.weighted.f1, n);
    return ss.str();
}

double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw std::invalid_argument("roc_auc: length mismatch");
    const auto n1 = static_cast<std::size_t>(std::count(y_true.begin(), y_true.end(), 1));
    const std::size_t n0 = y_true.size() - n1;
    if (n1 == 0 || n0 == 0) throw std::invalid_argument("roc_auc: single-class labels");

    // Average ranks over tie groups; AUC = (R+ - n1(n1+1)/2) / (n1*n0).
    std::vector<std::size_t> idx(y_true.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_pos_sum = 0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            if (y_true[idx[k]] == 1) rank_pos_sum += avg_rank;
        i = j + 1;
    }
    const double np = static_cast<double>(n1);
    return (rank_pos_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n0));
}

namespace {

std::vector<std::size_t> class_indices(const std::vector<int>& labels, int cls) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) out.push_back(i);
    return out;
}

}  // namespace

namespace {

// Largest-remainder apportionment of `total` over two classes proportional
// to their sizes, honoring per-class capacity. Ties go to class 0.
std::array<std::size_t, 2> apportion(std::size_t total, const std::array<std::size_t, 2>& size,
                                     const std::array<std::size_t, 2>& cap) {
    const double n = static_cast<double>(size[0] + size[1]);
    std::array<double, 2> ideal{static_cast<double>(total) * static_cast<double>(size[0]) / n,
                                static_cast<double>(total) * static_cast<double>(size[1]) / n};
    std::array<std::size_t, 2> out{
        std::min(cap[0], static_cast<std::size_t>(ideal[0])),
        std::min(cap[1], static_cast<std::size_t>(ideal[1]))};
    std::array<double, 2> frac{ideal[0] - std::floor(ideal[0]), ideal[1] - std::floor(ideal[1])};
    while (out[0] + out[1] < total) {
        const bool first = (frac[0] >= frac[1] && out[0] < cap[0]) || out[1] >= cap[1];
        std::size_t pick = first ? 0 : 1;
        if (out[pick] >= cap[pick]) break;  // both full
        ++out[pick];
        frac[pick] = -1;
    }
    return out;
}

}  // namespace

SplitIndices stratified_split(const std::vector<int>& labels, double train_ratio,
                              double val_ratio, double test_ratio, std::uint64_t seed) {
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("stratified_split: ratios must sum to 1");
    const std::size_t n = labels.size();
    if (n < 10) throw std::invalid_argument("stratified_split: need >= 10 samples");

    std::array<std::vector<std::size_t>, 2> idx{class_indices(labels, 0),
                                                class_indices(labels, 1)};
    for (int cls : {0, 1}) {
        if (idx[static_cast<std::size_t>(cls)].size() < 3)
            throw std::invalid_argument(
                "stratified_split: unsplittable stratum (class " + std::to_string(cls) + " has " +
                std::to_string(idx[static_cast<std::size_t>(cls)].size()) + " members)");
    }

    // Bucket sizes are rounded global quotas (train takes the remainder);
    // each bucket is then apportioned over the classes by largest remainder.
    auto n_val = static_cast<std::size_t>(std::llround(val_ratio * static_cast<double>(n)));
    auto n_test = static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(n)));
    n_val = std::min(n_val, n);
    n_test = std::min(n_test, n - n_val);

    const std::array<std::size_t, 2> sizes{idx[0].size(), idx[1].size()};
    const auto val_per = apportion(n_val, sizes, sizes);
    const auto test_per = apportion(
        n_test, sizes, {sizes[0] - val_per[0], sizes[1] - val_per[1]});

    SplitIndices out;
    Rng rng(derive_seed(seed, "split"));
    for (std::size_t cls = 0; cls < 2; ++cls) {
        auto& list = idx[cls];
        rng.shuffle(list);
        const std::size_t v = val_per[cls];
        const std::size_t t = test_per[cls];
        out.val.insert(out.val.end(), list.begin(), list.begin() + static_cast<std::ptrdiff_t>(v));
        out.test.insert(out.test.end(), list.begin() + static_cast<std::ptrdiff_t>(v),
                        list.begin() + static_cast<std::ptrdiff_t>(v + t));
        out.train.insert(out.train.end(), list.begin() + static_cast<std::ptrdiff_t>(v + t),
                         list.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& labels,
                                                       std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    std::vector<std::vector<std::size_t>> folds(k);
    Rng rng(derive_seed(seed, "kfold"));
    for (int cls : {0, 1}) {
        auto idx = class_indices(labels, cls);
        if (idx.size() < k)
            throw std::invalid_argument("stratified_kfold: class " + std::to_string(cls) +
                                        " smaller than k");
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i) folds[i % k].push_back(idx[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

namespace {

FeatureMatrix take_rows(const FeatureMatrix& X, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.column_names = X.column_names;
    out.row_ids.reserve(rows.size());
    out.values.reserve(rows.size());
    for (std::size_t r : rows) {
        out.row_ids.push_back(X.row_ids[r]);
        out.values.push_back(X.values[r]);
    }
    return out;
}

std::vector<int> take_labels(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(y[r]);
    return out;
}

}  // namespace

CvResult cross_validate(const FeatureMatrix& X, const std::vector<int>& y,
                        const ModelConfig& config, std::size_t k, std::uint64_t seed,
                        int threads) {
    const auto folds = stratified_kfold(y, k, seed);
    CvResult result;

    for (std::size_t f = 0; f < folds.size(); ++f) {
        try {
            std::vector<std::size_t> train_rows;
            for (std::size_t g = 0; g < folds.size(); ++g)
                if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
            std::sort(train_rows.begin(), train_rows.end());

            FeatureMatrix Xtr = take_rows(X, train_rows);
            FeatureMatrix Xte = take_rows(X, folds[f]);
            const auto ytr = take_labels(y, train_rows);
            const auto yte = take_labels(y, folds[f]);

            if (config.kind != ModelKind::Forest) {
                const auto stats = fit_standardizer(Xtr);
                Xtr = apply_standardizer(Xtr, stats);
                Xte = apply_standardizer(Xte, stats);
            }
            const auto model = train_model(Xtr, ytr, config, threads);
            const auto pred = predict_labels(model, Xte);
            const auto scores = decision_scores(model, Xte);

            result.fold_reports.push_back(classification_report(yte, pred));
            result.fold_auc.push_back(roc_auc(yte, scores));
        } catch (const std::exception& e) {
            throw std::runtime_error("cross_validate: fold " + std::to_string(f) + ": " +
                                     e.what());
        }
    }

    const double n = static_cast<double>(result.fold_reports.size());
    auto collect = [&](auto getter) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < result.fold_reports.size(); ++i) vals.push_back(getter(i));
        double mean = 0;
        for (double v : vals) mean += v;
        mean /= n;
        double var = 0;
        for (double v : vals) var += (v - mean) * (v - mean);
        return std::pair<double, double>{mean, std::sqrt(var / n)};
    };
    auto [am, as] = collect([&](std::size_t i) { return result.fold_reports[i].accuracy; });
    auto [pm, ps] = collect([&](std::size_t i) { return result.fold_reports[i].class1.precision; });
    auto [rm, rs] = collect([&](std::size_t i) { return result.fold_reports[i].class1.recall; });
    auto [fm, fs] = collect([&](std::size_t i) { return result.fold_reports[i].class1.f1; });
    auto [um, us] = collect([&](std::size_t i) { return result.fold_auc[i]; });
    result.mean = {am, pm, rm, fm, um};
    result.stddev = {as, ps, rs, fs, us};
    return result;
}

std::vector<ComparisonRow> compare_models(
    const std::vector<std::tuple<std::string, std::vector<int>, std::vector<int>>>& results) {
    if (results.empty()) throw std::invalid_argument("compare_models: no results");
    const auto& y_ref = std::get<1>(results.front());
    std::vector<ComparisonRow> rows;
    for (const auto& [name, y_true, y_pred] : results) {
        if (y_true.size() != y_ref.size() || y_true != y_ref)
            throw std::invalid_argument("compare_models: inconsistent y_true across entries");
        const auto m = metrics_from_confusion(confusion(y_true, y_pred));
        rows.push_back({name, m.accuracy, m.precision, m.recall, m.f1});
    }
    std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.f1 != b.f1) return a.f1 > b.f1;
        return a.model < b.model;
    });
    return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream ss;
    ss << "model,accuracy,precision,recall,f1\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f\n", r.accuracy, r.precision,
                      r.recall, r.f1);
        ss << r.model << buf;
    }
    return ss.str();
}

std::string report_json(const std::string& model, const ConfusionMatrix& cm,
                        const ClassReport& report, double auc) {
    nlohmann::json j;
    j["model"] = model;
    j["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
    auto per_class = [](const ClassReport::PerClass& c) {
        return nlohmann::json{{"precision", c.precision},
                              {"recall", c.recall},
                              {"f1", c.f1},
                              {"support", c.support}};
    };
    j["class0"] = per_class(report.class0);
    j["class1"] = per_class(report.class1);
    j["accuracy"] = report.accuracy;
    j["macro"] = {{"precision", report.macro.precision},
                  {"recall", report.macro.recall},
                  {"f1", report.macro.f1}};
    j["weighted"] = {{"precision", report.weighted.precision},
                     {"recall", report.weighted.recall},
                     {"f1", report.weighted.f1}};
    j["auc"] = auc;
    return j.dump(2) + "\n";
}

}  // namespace chainsift
