#include "chainsift/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chainsift/errors.hpp"
#include "chainsift/io_util.hpp"

namespace chainsift {

namespace {

using json = nlohmann::json;

// Reads one line, tolerating CRLF endings.
bool get_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::int64_t parse_int_field(std::string_view raw, std::string_view field,
                             std::size_t line, bool allow_negative = false) {
    auto s = trim(raw);
    if (s.empty())
        throw ParseError("line " + std::to_string(line) + ": empty field '" +
                         std::string(field) + "'");
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line) + ": field '" + std::string(field) +
                         "' is not an integer: '" + std::string(s) + "'");
    if (!allow_negative && v < 0)
        throw ParseError("line " + std::to_string(line) + ": field '" + std::string(field) +
                         "' must be nonnegative, got " + std::to_string(v));
    return v;
}

constexpr const char* kWalletHeader =
    "address,hash160,n_tx,n_unredeemed,total_received,total_sent,final_balance";

WalletRecord wallet_from_fields(const std::vector<std::string>& f, bool has_label,
                                std::size_t line) {
    WalletRecord r;
    r.address = f[0];
    r.hash160 = f[1];
    r.n_tx = parse_int_field(f[2], "n_tx", line);
    r.n_unredeemed = parse_int_field(f[3], "n_unredeemed", line);
    r.total_received = parse_int_field(f[4], "total_received", line);
    r.total_sent = parse_int_field(f[5], "total_sent", line);
    r.final_balance = parse_int_field(f[6], "final_balance", line);
    if (has_label) {
        auto s = trim(f[7]);
        if (!s.empty()) {
            auto v = parse_int_field(s, "label", line);
            if (v != 0 && v != 1)
                throw ParseError("line " + std::to_string(line) + ": label must be 0 or 1, got " +
                                 std::to_string(v));
            r.label = static_cast<int>(v);
        }
    }
    return r;
}

WalletRecord wallet_from_json(const json& j, std::size_t line) {
    for (const char* key :
         {"address", "hash160", "n_tx", "n_unredeemed", "total_received", "total_sent",
          "final_balance"}) {
        if (!j.contains(key))
            throw ParseError("line " + std::to_string(line) + ": missing key '" + key + "'");
    }
    WalletRecord r;
    r.address = j.at("address").get<std::string>();
    r.hash160 = j.at("hash160").get<std::string>();
    auto get_nonneg = [&](const char* key) {
        auto v = j.at(key).get<std::int64_t>();
        if (v < 0)
            throw ParseError("line " + std::to_string(line) + ": field '" + key +
                             "' must be nonnegative, got " + std::to_string(v));
        return v;
    };
    r.n_tx = get_nonneg("n_tx");
    r.n_unredeemed = get_nonneg("n_unredeemed");
    r.total_received = get_nonneg("total_received");
    r.total_sent = get_nonneg("total_sent");
    r.final_balance = get_nonneg("final_balance");
    if (j.contains("label") && !j.at("label").is_null()) {
        auto v = j.at("label").get<int>();
        if (v != 0 && v != 1)
            throw ParseError("line " + std::to_string(line) + ": label must be 0 or 1");
        r.label = v;
    }
    return r;
}

TransferRecord transfer_from_fields(const std::vector<std::string>& f, std::size_t line) {
    TransferRecord t;
    t.timestamp = parse_int_field(f[0], "timestamp", line, /*allow_negative=*/true);
    t.src = std::string(trim(f[1]));
    t.dst = std::string(trim(f[2]));
    t.value = parse_int_field(f[3], "value", line, /*allow_negative=*/true);
    if (t.value <= 0)
        throw ParseError("line " + std::to_string(line) + ": non-positive value");
    if (t.timestamp <= 0)
        throw ParseError("line " + std::to_string(line) + ": non-positive timestamp");
    if (t.src.empty() || t.dst.empty())
        throw ParseError("line " + std::to_string(line) + ": empty src or dst");
    return t;
}

TransferRecord transfer_from_json(const json& j, std::size_t line) {
    for (const char* key : {"timestamp", "src", "dst", "value"}) {
        if (!j.contains(key))
            throw ParseError("line " + std::to_string(line) + ": missing key '" + key + "'");
    }
    std::vector<std::string> f = {std::to_string(j.at("timestamp").get<std::int64_t>()),
                                  j.at("src").get<std::string>(), j.at("dst").get<std::string>(),
                                  std::to_string(j.at("value").get<std::int64_t>())};
    return transfer_from_fields(f, line);
}

// Shared strict/lenient row loop.
template <typename Row, typename ParseFn>
std::vector<Row> parse_rows(std::istream& in, Format format, ParseMode mode,
                            std::vector<RowIssue>* issues, std::size_t n_csv_fields,
                            std::size_t n_csv_fields_alt, const char* header_expect,
                            ParseFn&& parse_csv_fields, auto&& parse_json_obj) {
    std::vector<Row> out;
    std::string line;
    std::size_t line_no = 0;

    auto report = [&](const std::string& msg) {
        if (mode == ParseMode::Strict) throw ParseError(msg);
        if (issues) issues->push_back({line_no, msg});
    };

    if (format == Format::Csv) {
        if (!get_line(in, line)) throw ParseError("empty input: missing header");
        ++line_no;
        auto header = split_csv(line);
        auto expected = split_csv(header_expect);
        bool label_allowed = n_csv_fields_alt > n_csv_fields;
        if (header.size() != expected.size() &&
            !(label_allowed && header.size() == expected.size() + 1 &&
              trim(header.back()) == "label"))
            throw ParseError("bad header: expected '" + std::string(header_expect) +
                             (label_allowed ? "[,label]'" : "'"));
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (std::string(trim(header[i])) != expected[i])
                throw ParseError("bad header column " + std::to_string(i + 1) + ": expected '" +
                                 expected[i] + "', got '" + std::string(trim(header[i])) + "'");
        }
        bool has_label = header.size() == n_csv_fields_alt && label_allowed;

        const std::size_t max_fields = has_label ? n_csv_fields_alt : n_csv_fields;
        while (get_line(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            auto fields = split_csv(line);
            if (fields.size() != n_csv_fields && fields.size() != max_fields) {
                report("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(max_fields) + " fields, got " +
                       std::to_string(fields.size()));
                continue;
            }
            try {
                out.push_back(parse_csv_fields(fields, has_label && fields.size() == n_csv_fields_alt,
                                               line_no));
            } catch (const ParseError& e) {
                report(e.what());
            }
        }
    } else {
        while (get_line(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            try {
                json j = json::parse(line);
                out.push_back(parse_json_obj(j, line_no));
            } catch (const json::exception& e) {
                report("line " + std::to_string(line_no) + ": bad json: " + e.what());
            } catch (const ParseError& e) {
                report(e.what());
            }
        }
    }
    return out;
}

}  // namespace

std::vector<WalletRecord> parse_wallet_records(std::istream& in, Format format, ParseMode mode,
                                               std::vector<RowIssue>* issues) {
    return parse_rows<WalletRecord>(
        in, format, mode, issues, 7, 8, kWalletHeader,
        [](const std::vector<std::string>& f, bool has_label, std::size_t line) {
            return wallet_from_fields(f, has_label, line);
        },
        [](const json& j, std::size_t line) { return wallet_from_json(j, line); });
}

std::vector<TransferRecord> parse_transfer_log(std::istream& in, Format format, ParseMode mode,
                                               std::vector<RowIssue>* issues) {
    auto out = parse_rows<TransferRecord>(
        in, format, mode, issues, 4, 4, "timestamp,src,dst,value",
        [](const std::vector<std::string>& f, bool, std::size_t line) {
            return transfer_from_fields(f, line);
        },
        [](const json& j, std::size_t line) { return transfer_from_json(j, line); });
    std::stable_sort(out.begin(), out.end(),
                     [](const TransferRecord& a, const TransferRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    return out;
}

std::pair<std::vector<WalletRecord>, CleanReport> clean_records(
    const std::vector<WalletRecord>& records) {
    CleanReport report;
    report.rows_in = records.size();

    std::vector<WalletRecord> out;
    out.reserve(records.size());
    std::set<std::string> seen;  // dedup key: every field

    for (const auto& rec : records) {
        WalletRecord r = rec;
        r.address = std::string(trim(r.address));
        r.hash160 = std::string(trim(r.hash160));
        if (r.address.empty() || r.hash160.empty()) {
            ++report.rows_dropped_missing;
            continue;
        }
        std::string key = r.address + '\x1f' + r.hash160 + '\x1f' + std::to_string(r.n_tx) +
                          '\x1f' + std::to_string(r.n_unredeemed) + '\x1f' +
                          std::to_string(r.total_received) + '\x1f' +
                          std::to_string(r.total_sent) + '\x1f' +
                          std::to_string(r.final_balance) + '\x1f' +
                          (r.label ? std::to_string(*r.label) : std::string("-"));
        if (!seen.insert(key).second) {
            ++report.rows_dropped_duplicate;
            continue;
        }
        if (r.final_balance != r.total_received - r.total_sent ||
            r.total_sent > r.total_received) {
            ++report.soft_violations;
        }
        out.push_back(std::move(r));
    }
    report.rows_out = out.size();
    return {std::move(out), report};
}

std::string to_csv(const std::vector<WalletRecord>& records) {
    bool any_label = std::any_of(records.begin(), records.end(),
                                 [](const WalletRecord& r) { return r.label.has_value(); });
    std::ostringstream ss;
    ss << kWalletHeader;
    if (any_label) ss << ",label";
    ss << '\n';
    for (const auto& r : records) {
        ss << r.address << ',' << r.hash160 << ',' << r.n_tx << ',' << r.n_unredeemed << ','
           << r.total_received << ',' << r.total_sent << ',' << r.final_balance;
        if (any_label) {
            ss << ',';
            if (r.label) ss << *r.label;
        }
        ss << '\n';
    }
    return ss.str();
}

std::string to_csv(const std::vector<TransferRecord>& transfers) {
    std::ostringstream ss;
    ss << "timestamp,src,dst,value\n";
    for (const auto& t : transfers)
        ss << t.timestamp << ',' << t.src << ',' << t.dst << ',' << t.value << '\n';
    return ss.str();
}

std::string to_jsonl(const std::vector<WalletRecord>& records) {
    std::ostringstream ss;
    for (const auto& r : records) {
        json j{{"address", r.address},
               {"hash160", r.hash160},
               {"n_tx", r.n_tx},
               {"n_unredeemed", r.n_unredeemed},
               {"total_received", r.total_received},
               {"total_sent", r.total_sent},
               {"final_balance", r.final_balance}};
        if (r.label) j["label"] = *r.label;
        ss << j.dump() << '\n';
    }
    return ss.str();
}

std::string to_jsonl(const std::vector<TransferRecord>& transfers) {
    std::ostringstream ss;
    for (const auto& t : transfers) {
        json j{{"timestamp", t.timestamp}, {"src", t.src}, {"dst", t.dst}, {"value", t.value}};
        ss << j.dump() << '\n';
    }
    return ss.str();
}

}  // namespace chainsift
