#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latarb/marketdata/orderbook.hpp"

namespace latarb::marketdata {

struct IngestReport {
    std::size_t rows = 0;
    std::size_t snapshots = 0;
    std::size_t dropped_snapshots = 0;
};

// CSV header: exchange,timestamp,side,level,price,quantity. Side is "bid" or "ask", level is 1-based.
// Strict mode turns every invalid row or book into an error; otherwise bad books are dropped with a warning.
std::vector<OrderbookSnapshot> read_orderbooks_csv(const std::string& path, bool strict, IngestReport* report = nullptr);
// One object per line: {"exchange":..., "timestamp":..., "bids":[[price, qty], ...], "asks":[...]}.
std::vector<OrderbookSnapshot> read_orderbooks_jsonl(const std::string& path, bool strict, IngestReport* report = nullptr);
// Dispatches on the extension (.jsonl or .csv).
std::vector<OrderbookSnapshot> read_orderbooks(const std::string& path, bool strict, IngestReport* report = nullptr);

void write_orderbooks_csv(const std::string& path, const std::vector<OrderbookSnapshot>& snapshots);

// {"exchanges": [{"exchange", "taker_fee", "withdrawal_fee"|null, "confirmations"|null, "margin", "business"}]}
std::vector<ExchangeProfile> read_profiles(const std::string& path);

// Minute key M (minutes since epoch) -> exchange -> latest snapshot with timestamp in (60M - 60, 60M].
using MinuteBooks = std::map<std::int64_t, std::map<std::string, OrderbookSnapshot>>;
MinuteBooks align_to_minutes(const std::vector<OrderbookSnapshot>& snapshots);

}  // namespace latarb::marketdata
