#pragma once

#include <optional>
#include <string>
#include <vector>

#include "latarb/common/time.hpp"

namespace latarb::marketdata {

struct Level {
    double price = 0.0;
    double quantity = 0.0;
};

enum class Side { bid, ask };

struct OrderbookSnapshot {
    std::string exchange;
    Timestamp timestamp = 0;
    std::vector<Level> bids;  // descending price
    std::vector<Level> asks;  // ascending price

    // Throws invalid_argument for empty, crossed, unordered or non-positive books.
    void validate() const;
};

struct ExchangeProfile {
    std::string exchange;
    double taker_fee = 0.0;
    std::optional<double> withdrawal_fee;
    std::optional<int> confirmations;
    bool margin = false;
    bool business = false;

    static constexpr int kDefaultConfirmations = 3;

    double withdrawal_fee_or_default() const { return withdrawal_fee.value_or(0.0); }
    int confirmations_or_default() const { return confirmations.value_or(kDefaultConfirmations); }
    void validate() const;
};

// One side of a book with cumulative depth and notional for O(log n) fills.
class Ladder {
public:
    Ladder(Side side, const std::vector<Level>& levels);

    Side side() const { return side_; }
    double depth() const { return cum_qty_.empty() ? 0.0 : cum_qty_.back(); }
    double best_price() const { return levels_.front().price; }
    double min_level_quantity() const;
    const std::vector<double>& cumulative_depth() const { return cum_qty_; }
    const std::vector<Level>& levels() const { return levels_; }

    // Sum of price * quantity consumed when filling q units; throws insufficient_depth.
    double notional(double q) const;

private:
    Side side_;
    std::vector<Level> levels_;
    std::vector<double> cum_qty_;
    std::vector<double> cum_notional_;
};

// Volume-weighted fill price times (1 + fee) on asks or (1 - fee) on bids.
double walk_book(const Ladder& ladder, double quantity, double taker_fee);
double walk_book(Side side, const std::vector<Level>& levels, double quantity, double taker_fee);

}  // namespace latarb::marketdata
