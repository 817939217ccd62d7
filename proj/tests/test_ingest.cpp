#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "chainsift/errors.hpp"
#include "chainsift/ingest.hpp"

using namespace chainsift;

namespace {

const char* kHeader = "address,hash160,n_tx,n_unredeemed,total_received,total_sent,final_balance";

std::vector<WalletRecord> parse_csv(const std::string& body, ParseMode mode = ParseMode::Strict,
                                    std::vector<RowIssue>* issues = nullptr) {
    std::istringstream in(body);
    return parse_wallet_records(in, Format::Csv, mode, issues);
}

std::vector<TransferRecord> parse_transfers_csv(const std::string& body,
                                                ParseMode mode = ParseMode::Strict,
                                                std::vector<RowIssue>* issues = nullptr) {
    std::istringstream in(body);
    return parse_transfer_log(in, Format::Csv, mode, issues);
}

}  // namespace

TEST_CASE("wallet csv row maps fields directly") {
    auto recs = parse_csv(std::string(kHeader) + ",label\na1,ff00,5,1,1000,400,600,1\n");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].address == "a1");
    CHECK(recs[0].hash160 == "ff00");
    CHECK(recs[0].n_tx == 5);
    CHECK(recs[0].n_unredeemed == 1);
    CHECK(recs[0].total_received == 1000);
    CHECK(recs[0].total_sent == 400);
    CHECK(recs[0].final_balance == 600);
    REQUIRE(recs[0].label.has_value());
    CHECK(*recs[0].label == 1);
}

TEST_CASE("header-only file parses to an empty list") {
    CHECK(parse_csv(std::string(kHeader) + "\n").empty());
}

TEST_CASE("negative numeric field is a strict-mode error naming field and line") {
    try {
        parse_csv(std::string(kHeader) + "\na1,ff,-3,0,0,0,0\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("n_tx") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
}

TEST_CASE("lenient mode collects row issues and keeps going") {
    std::vector<RowIssue> issues;
    auto recs = parse_csv(std::string(kHeader) + "\na1,ff,1,0,5,0,5\nbad,ff,x,0,0,0,0\nb2,aa,2,0,7,0,7\n",
                          ParseMode::Lenient, &issues);
    CHECK(recs.size() == 2);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].line == 3);
}

TEST_CASE("label column is optional and may be empty per row") {
    auto recs = parse_csv(std::string(kHeader) + ",label\na1,ff,1,0,5,0,5,\nb2,aa,2,0,7,0,7,0\n");
    REQUIRE(recs.size() == 2);
    CHECK_FALSE(recs[0].label.has_value());
    CHECK(recs[1].label == 0);
}

TEST_CASE("crlf input is accepted") {
    auto recs = parse_csv(std::string(kHeader) + "\r\na1,ff,1,0,5,0,5\r\n");
    CHECK(recs.size() == 1);
    CHECK(recs[0].address == "a1");
}

TEST_CASE("wrong header is rejected") {
    CHECK_THROWS_AS(parse_csv("address,hash,n_tx,n_unredeemed,total_received,total_sent,final_balance\n"),
                    ParseError);
}

TEST_CASE("jsonl wallets mirror the csv fields") {
    std::istringstream in(
        R"({"address":"a1","hash160":"ff","n_tx":3,"n_unredeemed":0,"total_received":10,"total_sent":4,"final_balance":6,"label":0})"
        "\n");
    auto recs = parse_wallet_records(in, Format::Jsonl);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].n_tx == 3);
    CHECK(recs[0].label == 0);
}

TEST_CASE("clean drops rows with missing identifiers") {
    auto recs = parse_csv(std::string(kHeader) + "\na1,ff,1,0,5,0,5\nb2,,1,0,5,0,5\nc3,aa,1,0,5,0,5\n");
    auto [cleaned, report] = clean_records(recs);
    CHECK(cleaned.size() == 2);
    CHECK(report.rows_in == 3);
    CHECK(report.rows_dropped_missing == 1);
    CHECK(report.rows_dropped_duplicate == 0);
    CHECK(report.rows_out == 2);
}

TEST_CASE("clean drops exact duplicates, first kept, order preserved") {
    auto recs = parse_csv(std::string(kHeader) + "\na1,ff,1,0,5,0,5\nb2,aa,2,0,7,0,7\na1,ff,1,0,5,0,5\n");
    auto [cleaned, report] = clean_records(recs);
    REQUIRE(cleaned.size() == 2);
    CHECK(cleaned[0].address == "a1");
    CHECK(cleaned[1].address == "b2");
    CHECK(report.rows_dropped_duplicate == 1);
}

TEST_CASE("clean of distinct valid rows is the identity with an all-zero report") {
    std::vector<WalletRecord> recs;
    for (int i = 0; i < 10; ++i)
        recs.push_back({"a" + std::to_string(i), "ff" + std::to_string(i), i, 0, 10, 2, 8, {}});
    auto [cleaned, report] = clean_records(recs);
    CHECK(cleaned.size() == 10);
    CHECK(report.rows_dropped_missing == 0);
    CHECK(report.rows_dropped_duplicate == 0);
    CHECK(report.rows_out == 10);
}

TEST_CASE("clean is idempotent and only trims surviving strings") {
    std::vector<WalletRecord> recs{{" a1 ", " ff ", 1, 0, 10, 2, 8, 1}};
    auto [once, r1] = clean_records(recs);
    auto [twice, r2] = clean_records(once);
    CHECK(once == twice);
    CHECK(once[0].address == "a1");
    CHECK(once[0].n_tx == 1);
    CHECK(once[0].label == 1);
    CHECK(r2.rows_dropped_missing == 0);
    CHECK(r2.rows_dropped_duplicate == 0);
}

TEST_CASE("clean report arithmetic identity holds on random-ish inputs") {
    std::vector<WalletRecord> recs;
    for (int i = 0; i < 50; ++i) {
        WalletRecord r{"a" + std::to_string(i % 17), "h" + std::to_string(i % 13),
                       i % 5, 0, 100, i % 3 == 0 ? 200 : 10, 90, {}};
        if (i % 7 == 0) r.hash160 = "";
        recs.push_back(r);
    }
    auto [cleaned, report] = clean_records(recs);
    CHECK(report.rows_out == report.rows_in - report.rows_dropped_missing -
                                 report.rows_dropped_duplicate);
    CHECK(cleaned.size() == report.rows_out);
}

TEST_CASE("soft violations are counted, never dropped") {
    // balance != received - sent, and sent > received
    std::vector<WalletRecord> recs{{"a1", "ff", 1, 0, 10, 2, 9, {}},
                                   {"b2", "aa", 1, 0, 5, 9, 0, {}},
                                   {"c3", "bb", 1, 0, 10, 2, 8, {}}};
    auto [cleaned, report] = clean_records(recs);
    CHECK(cleaned.size() == 3);
    CHECK(report.soft_violations == 2);
}

TEST_CASE("transfer log sorts ascending by timestamp, stable on ties") {
    auto ts = parse_transfers_csv("timestamp,src,dst,value\n5,a,b,1\n3,c,d,2\n4,e,f,3\n3,g,h,4\n");
    REQUIRE(ts.size() == 4);
    CHECK(ts[0].timestamp == 3);
    CHECK(ts[0].src == "c");  // first of the tied pair keeps input order
    CHECK(ts[1].src == "g");
    CHECK(ts[2].timestamp == 4);
    CHECK(ts[3].timestamp == 5);
}

TEST_CASE("non-positive transfer value is a row error") {
    try {
        parse_transfers_csv("timestamp,src,dst,value\n5,a,b,0\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("non-positive value") != std::string::npos);
    }
}

TEST_CASE("self transfers are accepted and flagged") {
    auto ts = parse_transfers_csv("timestamp,src,dst,value\n5,a,a,10\n");
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].self_transfer());
}

TEST_CASE("parse -> serialize -> parse round-trips bit-identically") {
    const std::string original = std::string(kHeader) +
                                 ",label\na1,ff00,5,1,1000,400,600,1\nb2,aa11,2,0,50,10,40,0\n";
    auto recs = parse_csv(original);
    const auto serialized = to_csv(recs);
    CHECK(serialized == original);
    auto reparsed = parse_csv(serialized);
    CHECK(recs == reparsed);

    const std::string tlog = "timestamp,src,dst,value\n3,a,b,7\n5,c,d,9\n";
    auto ts = parse_transfers_csv(tlog);
    CHECK(to_csv(ts) == tlog);

    // jsonl round-trip through the parser
    std::istringstream jin(to_jsonl(recs));
    auto jrecs = parse_wallet_records(jin, Format::Jsonl);
    CHECK(jrecs == recs);
    std::istringstream tin(to_jsonl(ts));
    auto jts = parse_transfer_log(tin, Format::Jsonl);
    CHECK(jts == ts);
}
