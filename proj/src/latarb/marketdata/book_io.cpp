#include "latarb/marketdata/book_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "latarb/common/csv.hpp"
#include "latarb/common/error.hpp"
#include "latarb/common/log.hpp"
#include "latarb/common/numfmt.hpp"

namespace latarb::marketdata {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxLevels = 25;

void finish(std::vector<OrderbookSnapshot>& books, bool strict, const std::string& source, IngestReport* report) {
    std::vector<OrderbookSnapshot> kept;
    std::size_t dropped = 0;
    for (auto& b : books) {
        try {
            if (b.bids.size() > kMaxLevels || b.asks.size() > kMaxLevels)
                fail(ErrorCode::invalid_argument, b.exchange + " book deeper than 25 levels");
            b.validate();
            kept.push_back(std::move(b));
        } catch (const Error& e) {
            std::string msg = source + ": " + format_timestamp(b.timestamp) + ": " + e.what();
            if (strict) fail(ErrorCode::parse_error, msg);
            log::warn("dropping book: " + msg);
            ++dropped;
        }
    }
    std::sort(kept.begin(), kept.end(), [](const OrderbookSnapshot& a, const OrderbookSnapshot& b) {
        return std::tie(a.timestamp, a.exchange) < std::tie(b.timestamp, b.exchange);
    });
    if (report) {
        report->snapshots = kept.size();
        report->dropped_snapshots = dropped;
    }
    books = std::move(kept);
}

}  // namespace

std::vector<OrderbookSnapshot> read_orderbooks_csv(const std::string& path, bool strict, IngestReport* report) {
    csv::Table t = csv::read_file(path);
    csv::require_header(t, {"exchange", "timestamp", "side", "level", "price", "quantity"}, path);
    // (exchange, timestamp) -> side -> level -> (price, qty)
    std::map<std::pair<std::string, Timestamp>, std::map<std::string, std::map<int, Level>>> grouped;
    std::set<std::pair<std::string, Timestamp>> broken;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        std::string where = path + ":" + std::to_string(t.lines[r]);
        try {
            Timestamp ts = parse_timestamp(row[1]);
            auto key = std::make_pair(row[0], ts);
            if (row[0].empty()) fail(ErrorCode::parse_error, "empty exchange id");
            if (row[2] != "bid" && row[2] != "ask") fail(ErrorCode::parse_error, "side must be bid or ask");
            double lv = parse_double(row[3]);
            if (!(lv >= 1.0) || lv != static_cast<int>(lv)) fail(ErrorCode::parse_error, "level must be a positive integer");
            Level level{parse_double(row[4]), parse_double(row[5])};
            auto& side = grouped[key][row[2]];
            if (!side.emplace(static_cast<int>(lv), level).second) fail(ErrorCode::parse_error, "duplicate level");
        } catch (const Error& e) {
            if (strict) fail(ErrorCode::parse_error, where + ": " + e.what());
            log::warn(where + ": " + e.what());
            try {
                broken.emplace(row[0], parse_timestamp(row[1]));
            } catch (const Error&) {
            }
        }
    }
    std::vector<OrderbookSnapshot> books;
    std::size_t pre_dropped = 0;
    for (auto& [key, sides] : grouped) {
        if (broken.count(key)) {
            ++pre_dropped;
            continue;
        }
        OrderbookSnapshot s;
        s.exchange = key.first;
        s.timestamp = key.second;
        bool contiguous = true;
        for (const auto& [name, levels] : sides) {
            int expect = 1;
            auto& out = name == "bid" ? s.bids : s.asks;
            for (const auto& [lv, level] : levels) {
                if (lv != expect++) contiguous = false;
                out.push_back(level);
            }
        }
        if (!contiguous) {
            std::string msg = path + ": " + s.exchange + " " + format_timestamp(s.timestamp) + ": level numbers are not contiguous";
            if (strict) fail(ErrorCode::parse_error, msg);
            log::warn("dropping book: " + msg);
            ++pre_dropped;
            continue;
        }
        books.push_back(std::move(s));
    }
    finish(books, strict, path, report);
    if (report) {
        report->rows = t.rows.size();
        report->dropped_snapshots += pre_dropped;
    }
    return books;
}

std::vector<OrderbookSnapshot> read_orderbooks_jsonl(const std::string& path, bool strict, IngestReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "'");
    std::vector<OrderbookSnapshot> books;
    std::string line;
    std::size_t lineno = 0, rows = 0, bad = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        ++rows;
        try {
            json j = json::parse(line);
            OrderbookSnapshot s;
            s.exchange = j.at("exchange").get<std::string>();
            s.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
            for (const auto& l : j.at("bids")) s.bids.push_back({l.at(0).get<double>(), l.at(1).get<double>()});
            for (const auto& l : j.at("asks")) s.asks.push_back({l.at(0).get<double>(), l.at(1).get<double>()});
            books.push_back(std::move(s));
        } catch (const std::exception& e) {
            std::string msg = path + ":" + std::to_string(lineno) + ": " + e.what();
            if (strict) fail(ErrorCode::parse_error, msg);
            log::warn(msg);
            ++bad;
        }
    }
    finish(books, strict, path, report);
    if (report) {
        report->rows = rows;
        report->dropped_snapshots += bad;
    }
    return books;
}

std::vector<OrderbookSnapshot> read_orderbooks(const std::string& path, bool strict, IngestReport* report) {
    auto ends_with = [&](const std::string& suffix) {
        return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".jsonl")) return read_orderbooks_jsonl(path, strict, report);
    return read_orderbooks_csv(path, strict, report);
}

void write_orderbooks_csv(const std::string& path, const std::vector<OrderbookSnapshot>& snapshots) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write '" + path + "'");
    csv::write_row(out, {"exchange", "timestamp", "side", "level", "price", "quantity"});
    for (const auto& s : snapshots) {
        std::string ts = format_timestamp(s.timestamp);
        for (std::size_t i = 0; i < s.bids.size(); ++i)
            csv::write_row(out, {s.exchange, ts, "bid", std::to_string(i + 1), format_double(s.bids[i].price), format_double(s.bids[i].quantity)});
        for (std::size_t i = 0; i < s.asks.size(); ++i)
            csv::write_row(out, {s.exchange, ts, "ask", std::to_string(i + 1), format_double(s.asks[i].price), format_double(s.asks[i].quantity)});
    }
}

std::vector<ExchangeProfile> read_profiles(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        fail(ErrorCode::parse_error, path + ": " + e.what());
    }
    std::vector<ExchangeProfile> out;
    try {
        for (const auto& e : j.at("exchanges")) {
            ExchangeProfile p;
            p.exchange = e.at("exchange").get<std::string>();
            p.taker_fee = e.at("taker_fee").get<double>();
            if (e.contains("withdrawal_fee") && !e["withdrawal_fee"].is_null()) p.withdrawal_fee = e["withdrawal_fee"].get<double>();
            if (e.contains("confirmations") && !e["confirmations"].is_null()) p.confirmations = e["confirmations"].get<int>();
            p.margin = e.value("margin", false);
            p.business = e.value("business", false);
            p.validate();
            out.push_back(std::move(p));
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(ErrorCode::parse_error, path + ": " + e.what());
    }
    std::set<std::string> seen;
    for (const auto& p : out)
        if (!seen.insert(p.exchange).second) fail(ErrorCode::parse_error, path + ": duplicate exchange '" + p.exchange + "'");
    return out;
}

MinuteBooks align_to_minutes(const std::vector<OrderbookSnapshot>& snapshots) {
    MinuteBooks out;
    for (const auto& s : snapshots) {
        auto& slot = out[minute_bucket(s.timestamp)];
        auto it = slot.find(s.exchange);
        if (it == slot.end() || it->second.timestamp <= s.timestamp) slot[s.exchange] = s;
    }
    return out;
}

}  // namespace latarb::marketdata
