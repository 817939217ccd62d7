#include "chainsift/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chainsift/io_util.hpp"

namespace chainsift {

SummaryStats summary_stats(const std::vector<double>& column) {
    if (column.empty()) throw std::invalid_argument("summary_stats: empty column");
    const double n = static_cast<double>(column.size());

    SummaryStats s;
    double sum = 0;
    s.min = column[0];
    s.max = column[0];
    for (double v : column) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / n;

    double m2 = 0, m3 = 0;
    for (double v : column) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    s.variance = m2 / n;
    const double sigma = std::sqrt(s.variance);
    s.skewness = sigma > 0 ? (m3 / n) / (sigma * sigma * sigma) : 0.0;

    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = sorted.size() / 2;
    s.median = sorted.size() % 2 == 1 ? sorted[half] : 0.5 * (sorted[half - 1] + sorted[half]);
    return s;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

CorrelationMatrix correlation_matrix(const std::vector<std::string>& names,
                                     const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size())
        throw std::invalid_argument("correlation_matrix: names/columns size mismatch");
    if (columns.empty()) throw std::invalid_argument("correlation_matrix: no columns");
    const std::size_t rows = columns[0].size();
    if (rows < 2) throw std::invalid_argument("correlation_matrix: need >= 2 rows");
    for (const auto& c : columns)
        if (c.size() != rows) throw std::invalid_argument("correlation_matrix: ragged columns");

    const std::size_t p = columns.size();
    CorrelationMatrix m;
    m.columns = names;
    m.r.assign(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        m.r[i][i] = 1.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            const double r = pearson(columns[i], columns[j]);
            m.r[i][j] = r;
            m.r[j][i] = r;
        }
    }
    return m;
}

std::vector<std::pair<std::string, std::int64_t>> top_k_by_field(
    const std::vector<WalletRecord>& records, const std::string& field, std::size_t k) {
    if (k < 1) throw std::invalid_argument("top_k_by_field: k must be >= 1");
    std::int64_t WalletRecord::*member = nullptr;
    if (field == "n_tx")
        member = &WalletRecord::n_tx;
    else if (field == "n_unredeemed")
        member = &WalletRecord::n_unredeemed;
    else if (field == "total_received")
        member = &WalletRecord::total_received;
    else if (field == "total_sent")
        member = &WalletRecord::total_sent;
    else if (field == "final_balance")
        member = &WalletRecord::final_balance;
    else
        throw std::invalid_argument("top_k_by_field: unknown field '" + field + "'");

    std::vector<std::pair<std::string, std::int64_t>> all;
    all.reserve(records.size());
    for (const auto& r : records) all.emplace_back(r.address, r.*member);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

std::vector<double> log1p_column(const std::vector<double>& column) {
    std::vector<double> out;
    out.reserve(column.size());
    for (double v : column) {
        if (v < 0) throw std::invalid_argument("log1p_column: negative input");
        out.push_back(std::log1p(v));
    }
    return out;
}

FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("linear_fit: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate regressor");

    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r = pearson(x, y);
    f.n = x.size();
    return f;
}

Histogram histogram(const std::vector<double>& column, std::size_t bins) {
    if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
    if (column.empty()) throw std::invalid_argument("histogram: empty column");

    double lo = column[0], hi = column[0];
    for (double v : column) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) hi = lo + 1.0;  // degenerate range: edges [v, v+1)

    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    h.edges[bins] = hi;

    h.counts.assign(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double v : column) {
        auto idx = static_cast<std::size_t>((v - lo) / width);
        if (idx >= bins) idx = bins - 1;  // right edge folds into the last bin
        ++h.counts[idx];
    }
    return h;
}

std::string corr_csv(const CorrelationMatrix& m) {
    std::ostringstream ss;
    ss << "column";
    for (const auto& name : m.columns) ss << ',' << name;
    ss << '\n';
    for (std::size_t i = 0; i < m.columns.size(); ++i) {
        ss << m.columns[i];
        for (std::size_t j = 0; j < m.columns.size(); ++j) ss << ',' << fmt_double(m.r[i][j]);
        ss << '\n';
    }
    return ss.str();
}

std::string topk_csv(const std::vector<std::pair<std::string, std::int64_t>>& ranked) {
    std::ostringstream ss;
    ss << "address,value\n";
    for (const auto& [addr, value] : ranked) ss << addr << ',' << value << '\n';
    return ss.str();
}

std::string hist_csv(const Histogram& h) {
    std::ostringstream ss;
    ss << "edge_lo,edge_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        ss << fmt_double(h.edges[i]) << ',' << fmt_double(h.edges[i + 1]) << ',' << h.counts[i]
           << '\n';
    return ss.str();
}

std::string fit_csv(const FitResult& f) {
    std::ostringstream ss;
    ss << "slope,intercept,r,n\n";
    ss << fmt_double(f.slope) << ',' << fmt_double(f.intercept) << ',' << fmt_double(f.r) << ','
       << f.n << '\n';
    return ss.str();
}

std::string scatter_csv(const std::vector<WalletRecord>& records) {
    std::ostringstream ss;
    ss << "total_received,total_sent,n_tx,final_balance\n";
    for (const auto& r : records)
        ss << r.total_received << ',' << r.total_sent << ',' << r.n_tx << ',' << r.final_balance
           << '\n';
    return ss.str();
}

}  // namespace chainsift
