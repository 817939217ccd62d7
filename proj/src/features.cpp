#include "chainsift/features.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "chainsift/io_util.hpp"

namespace chainsift {

double activity_intensity(std::int64_t n_tx, std::int64_t total_received) {
    return static_cast<double>(n_tx) / (static_cast<double>(total_received) + 1.0);
}

std::vector<double> rank_descending(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        // positions i..j (0-based) share the average of ranks i+1..j+1
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (pct < 0.0 || pct > 100.0) throw std::invalid_argument("percentile: pct out of [0,100]");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * pct / 100.0;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

// Event view of one wallet: indices into the (time-sorted) transfer list.
std::vector<std::size_t> wallet_events(const std::vector<TransferRecord>& transfers,
                                       const std::string& wallet) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < transfers.size(); ++i)
        if (transfers[i].src == wallet || transfers[i].dst == wallet) out.push_back(i);
    return out;
}

std::vector<std::int64_t> frequency_from_events(const std::vector<TransferRecord>& transfers,
                                                const std::vector<std::size_t>& events,
                                                std::int64_t window) {
    if (window <= 0) throw std::invalid_argument("transaction_frequency: window must be > 0");
    if (events.empty()) return {};
    const std::int64_t first = transfers[events.front()].timestamp;
    const std::int64_t last = transfers[events.back()].timestamp;
    const auto n_windows = static_cast<std::size_t>((last - first) / window) + 1;
    std::vector<std::int64_t> counts(n_windows, 0);
    for (std::size_t i : events)
        ++counts[static_cast<std::size_t>((transfers[i].timestamp - first) / window)];
    return counts;
}

struct ValueCutoffs {
    double large = 0;
    double small = 0;
};

AmountProfile profile_from_events(const std::vector<TransferRecord>& transfers,
                                  const std::vector<std::size_t>& events,
                                  const std::string& wallet, const ValueCutoffs& cut) {
    AmountProfile p;
    if (events.empty()) return p;

    std::vector<double> vals;
    vals.reserve(events.size());
    std::size_t n_large = 0, n_small = 0;
    for (std::size_t i : events) {
        const auto& t = transfers[i];
        const double v = static_cast<double>(t.value);
        vals.push_back(v);
        if (v > cut.large) ++n_large;
        if (v < cut.small) ++n_small;
        if (t.src == wallet) p.sent_count += 1;
        if (t.dst == wallet) p.recv_count += 1;
    }
    const double n = static_cast<double>(vals.size());
    double sum = 0;
    for (double v : vals) sum += v;
    p.mean = sum / n;
    double m2 = 0;
    for (double v : vals) m2 += (v - p.mean) * (v - p.mean);
    p.variance = m2 / n;
    std::sort(vals.begin(), vals.end());
    const std::size_t half = vals.size() / 2;
    p.median = vals.size() % 2 == 1 ? vals[half] : 0.5 * (vals[half - 1] + vals[half]);
    p.frac_large = static_cast<double>(n_large) / n;
    p.frac_small = static_cast<double>(n_small) / n;
    return p;
}

ValueCutoffs global_cutoffs(const std::vector<TransferRecord>& transfers, double large_pct,
                            double small_pct) {
    if (!(small_pct >= 0.0 && small_pct < large_pct && large_pct <= 100.0))
        throw std::invalid_argument("amount_profile: need 0 <= small_pct < large_pct <= 100");
    std::vector<double> all;
    all.reserve(transfers.size());
    for (const auto& t : transfers) all.push_back(static_cast<double>(t.value));
    ValueCutoffs cut;
    if (!all.empty()) {
        cut.large = percentile(all, large_pct);
        cut.small = percentile(std::move(all), small_pct);
    }
    return cut;
}

double population_variance(const std::vector<std::int64_t>& v, double mean) {
    if (v.empty()) return 0.0;
    double m2 = 0;
    for (auto x : v) {
        const double d = static_cast<double>(x) - mean;
        m2 += d * d;
    }
    return m2 / static_cast<double>(v.size());
}

}  // namespace

std::vector<std::int64_t> transaction_frequency(const std::vector<TransferRecord>& transfers,
                                                const std::string& wallet, std::int64_t window) {
    return frequency_from_events(transfers, wallet_events(transfers, wallet), window);
}

AmountProfile amount_profile(const std::vector<TransferRecord>& transfers,
                             const std::string& wallet, double large_pct, double small_pct) {
    const auto cut = global_cutoffs(transfers, large_pct, small_pct);
    return profile_from_events(transfers, wallet_events(transfers, wallet), wallet, cut);
}

StandardizerStats fit_standardizer(const FeatureMatrix& m) {
    if (m.rows() == 0) throw std::invalid_argument("fit_standardizer: empty matrix");
    const double n = static_cast<double>(m.rows());
    StandardizerStats s;
    s.mean.assign(m.cols(), 0.0);
    s.stddev.assign(m.cols(), 0.0);
    for (const auto& row : m.values)
        for (std::size_t c = 0; c < m.cols(); ++c) s.mean[c] += row[c];
    for (auto& v : s.mean) v /= n;
    for (const auto& row : m.values)
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double d = row[c] - s.mean[c];
            s.stddev[c] += d * d;
        }
    for (auto& v : s.stddev) v = std::sqrt(v / n);
    return s;
}

FeatureMatrix apply_standardizer(const FeatureMatrix& m, const StandardizerStats& stats) {
    if (stats.mean.size() != m.cols())
        throw std::invalid_argument("apply_standardizer: column count mismatch");
    FeatureMatrix out = m;
    for (auto& row : out.values)
        for (std::size_t c = 0; c < m.cols(); ++c)
            row[c] = stats.stddev[c] > 0 ? (row[c] - stats.mean[c]) / stats.stddev[c] : 0.0;
    return out;
}

FeatureMatrix assemble_features(const std::vector<WalletRecord>& records,
                                const std::vector<TransferRecord>* transfers,
                                const CentralityBundle* graph_scores, const FeatureConfig& config,
                                int threads) {
    FeatureMatrix m;
    m.column_names = {"n_tx",
                      "n_unredeemed",
                      "total_received",
                      "total_sent",
                      "final_balance",
                      "log1p_total_received",
                      "log1p_total_sent",
                      "log1p_final_balance",
                      "activity_intensity"};
    if (transfers) {
        for (const char* c : {"freq_mean", "freq_max", "freq_var", "amt_mean", "amt_median",
                              "amt_var", "frac_large", "frac_small", "sent_count", "recv_count"})
            m.column_names.push_back(c);
    }
    if (graph_scores) {
        for (const char* c : {"degree", "closeness", "betweenness"}) m.column_names.push_back(c);
    }

    m.row_ids.reserve(records.size());
    {
        std::unordered_map<std::string, std::size_t> seen;
        for (const auto& r : records) {
            if (!seen.emplace(r.address, m.row_ids.size()).second)
                throw std::invalid_argument("assemble_features: duplicate address '" + r.address +
                                            "'");
            m.row_ids.push_back(r.address);
        }
    }

    // Per-wallet event index lists, one pass over the log.
    std::vector<std::vector<std::size_t>> events(records.size());
    ValueCutoffs cutoffs;
    if (transfers) {
        if (config.frequency_window <= 0)
            throw std::invalid_argument("assemble_features: frequency_window must be > 0");
        std::unordered_map<std::string, std::size_t> row_of;
        row_of.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) row_of[records[i].address] = i;
        for (std::size_t i = 0; i < transfers->size(); ++i) {
            const auto& t = (*transfers)[i];
            auto s = row_of.find(t.src);
            if (s != row_of.end()) events[s->second].push_back(i);
            if (!t.self_transfer()) {
                auto d = row_of.find(t.dst);
                if (d != row_of.end()) events[d->second].push_back(i);
            }
        }
        cutoffs = global_cutoffs(*transfers, config.large_pct, config.small_pct);
    }

    m.values.assign(records.size(), std::vector<double>(m.cols(), 0.0));

#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(records.size()); ++ri) {
        const auto& r = records[static_cast<std::size_t>(ri)];
        auto& row = m.values[static_cast<std::size_t>(ri)];
        std::size_t c = 0;
        row[c++] = static_cast<double>(r.n_tx);
        row[c++] = static_cast<double>(r.n_unredeemed);
        row[c++] = static_cast<double>(r.total_received);
        row[c++] = static_cast<double>(r.total_sent);
        row[c++] = static_cast<double>(r.final_balance);
        row[c++] = std::log1p(static_cast<double>(r.total_received));
        row[c++] = std::log1p(static_cast<double>(r.total_sent));
        row[c++] = std::log1p(static_cast<double>(r.final_balance));
        row[c++] = activity_intensity(r.n_tx, r.total_received);

        if (transfers) {
            const auto& ev = events[static_cast<std::size_t>(ri)];
            const auto freq = frequency_from_events(*transfers, ev, config.frequency_window);
            double fmean = 0, fmax = 0;
            if (!freq.empty()) {
                std::int64_t sum = 0, mx = freq[0];
                for (auto v : freq) {
                    sum += v;
                    mx = std::max(mx, v);
                }
                fmean = static_cast<double>(sum) / static_cast<double>(freq.size());
                fmax = static_cast<double>(mx);
            }
            row[c++] = fmean;
            row[c++] = fmax;
            row[c++] = population_variance(freq, fmean);

            const auto p = profile_from_events(*transfers, ev, r.address, cutoffs);
            row[c++] = p.mean;
            row[c++] = p.median;
            row[c++] = p.variance;
            row[c++] = p.frac_large;
            row[c++] = p.frac_small;
            row[c++] = p.sent_count;
            row[c++] = p.recv_count;
        }
        if (graph_scores) {
            auto lookup = [&](const NodeScores& s) {
                auto it = s.score.find(r.address);
                return it == s.score.end() ? 0.0 : it->second;
            };
            row[c++] = lookup(graph_scores->degree);
            row[c++] = lookup(graph_scores->closeness);
            row[c++] = lookup(graph_scores->betweenness);
        }
    }

    for (const auto& row : m.values)
        for (double v : row)
            if (!std::isfinite(v))
                throw std::invalid_argument("assemble_features: non-finite feature value");

    // Labels travel with the matrix only when complete.
    const std::size_t labeled = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(),
                      [](const WalletRecord& r) { return r.label.has_value(); }));
    if (labeled == records.size() && !records.empty()) {
        std::vector<int> labels;
        labels.reserve(records.size());
        for (const auto& r : records) labels.push_back(*r.label);
        m.labels = std::move(labels);
    } else if (labeled != 0) {
        throw std::invalid_argument("assemble_features: labels present on only some records");
    }
    return m;
}

std::string features_csv(const FeatureMatrix& m) {
    std::ostringstream ss;
    ss << "address";
    for (const auto& c : m.column_names) ss << ',' << c;
    if (m.labels) ss << ",label";
    ss << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        ss << m.row_ids[r];
        for (double v : m.values[r]) ss << ',' << fmt_double(v);
        if (m.labels) ss << ',' << (*m.labels)[r];
        ss << '\n';
    }
    return ss.str();
}

std::string feature_manifest_json(const FeatureMatrix& m) {
    nlohmann::json j;
    j["columns"] = m.column_names;
    j["rows"] = m.rows();
    j["has_labels"] = m.labels.has_value();
    return j.dump(2) + "\n";
}

}  // namespace chainsift
