/// @file ingest.hpp
/// @brief Wallet summary and transfer log ingestion: parse, validate, clean.
///
/// Wallet CSV schema (exact header):
///   address,hash160,n_tx,n_unredeemed,total_received,total_sent,final_balance[,label]
/// Transfer CSV schema:
///   timestamp,src,dst,value
/// JSONL inputs mirror the same field names, one object per line.
/// All amounts are integer satoshi.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace chainsift {

/// One address's summary row; the unit of classification.
struct WalletRecord {
    std::string address;
    std::string hash160;
    std::int64_t n_tx = 0;
    std::int64_t n_unredeemed = 0;
    std::int64_t total_received = 0;  // satoshi
    std::int64_t total_sent = 0;      // satoshi
    std::int64_t final_balance = 0;   // satoshi
    std::optional<int> label;         // 1 = suspicious, 0 = benign

    bool operator==(const WalletRecord&) const = default;
};

/// One timestamped wallet-to-wallet value flow.
struct TransferRecord {
    std::int64_t timestamp = 0;  // seconds since epoch
    std::string src;
    std::string dst;
    std::int64_t value = 0;  // satoshi, > 0

    bool self_transfer() const { return src == dst; }
    bool operator==(const TransferRecord&) const = default;
};

/// Tally of what cleaning did. rows_out = rows_in - dropped_missing - dropped_duplicate.
struct CleanReport {
    std::size_t rows_in = 0;
    std::size_t rows_dropped_missing = 0;
    std::size_t rows_dropped_duplicate = 0;
    std::size_t rows_out = 0;
    /// Rows where final_balance != total_received - total_sent, or
    /// total_sent > total_received. Warned, never rejected: exported
    /// snapshots routinely carry this kind of skew.
    std::size_t soft_violations = 0;
};

enum class Format { Csv, Jsonl };

/// Strict aborts on the first malformed row; Lenient collects per-row issues
/// and keeps going.
enum class ParseMode { Strict, Lenient };

struct RowIssue {
    std::size_t line = 0;  // 1-based, header included
    std::string message;
};

/// Parse wallet summary rows. Numeric fields must be nonnegative integers;
/// identifiers are kept verbatim (trimming happens in clean_records).
/// The label column is optional.
std::vector<WalletRecord> parse_wallet_records(std::istream& in, Format format,
                                               ParseMode mode = ParseMode::Strict,
                                               std::vector<RowIssue>* issues = nullptr);

/// Parse a transfer log. Output is sorted ascending by timestamp (stable on
/// ties); rows with value <= 0 or timestamp <= 0 are rejected.
std::vector<TransferRecord> parse_transfer_log(std::istream& in, Format format,
                                               ParseMode mode = ParseMode::Strict,
                                               std::vector<RowIssue>* issues = nullptr);

/// Drop rows with an empty address or hash160, drop exact duplicates (first
/// occurrence kept, order otherwise preserved), trim identifier whitespace.
/// Total: never fails. Idempotent.
std::pair<std::vector<WalletRecord>, CleanReport> clean_records(
    const std::vector<WalletRecord>& records);

std::string to_csv(const std::vector<WalletRecord>& records);
std::string to_csv(const std::vector<TransferRecord>& transfers);
std::string to_jsonl(const std::vector<WalletRecord>& records);
std::string to_jsonl(const std::vector<TransferRecord>& transfers);

}  // namespace chainsift
