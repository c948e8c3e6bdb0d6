#include "latarb/marketdata/orderbook.hpp"

#include <algorithm>
#include <cmath>

#include "latarb/common/error.hpp"

namespace latarb::marketdata {
namespace {

void validate_side(const std::vector<Level>& levels, bool descending, const std::string& what) {
    if (levels.empty()) fail(ErrorCode::invalid_argument, what + " ladder is empty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i].price > 0.0) || !(levels[i].quantity > 0.0) || !std::isfinite(levels[i].price) ||
            !std::isfinite(levels[i].quantity))
            fail(ErrorCode::invalid_argument, what + " level " + std::to_string(i + 1) + " has non-positive price or quantity");
        if (i == 0) continue;
        bool ordered = descending ? levels[i].price < levels[i - 1].price : levels[i].price > levels[i - 1].price;
        if (!ordered) fail(ErrorCode::invalid_argument, what + " prices are not strictly " + (descending ? "descending" : "ascending"));
    }
}

}  // namespace

void OrderbookSnapshot::validate() const {
    validate_side(bids, true, exchange + " bid");
    validate_side(asks, false, exchange + " ask");
    if (bids.front().price > asks.front().price) fail(ErrorCode::invalid_argument, exchange + " book is crossed");
}

void ExchangeProfile::validate() const {
    if (!(taker_fee >= 0.0) || taker_fee >= 1.0) fail(ErrorCode::invalid_argument, exchange + ": taker fee must be in [0, 1)");
    if (withdrawal_fee && !(*withdrawal_fee >= 0.0)) fail(ErrorCode::invalid_argument, exchange + ": negative withdrawal fee");
    if (confirmations && *confirmations < 1) fail(ErrorCode::invalid_argument, exchange + ": confirmations must be >= 1");
}

Ladder::Ladder(Side side, const std::vector<Level>& levels) : side_(side), levels_(levels) {
    validate_side(levels_, side == Side::bid, side == Side::bid ? "bid" : "ask");
    double q = 0.0, n = 0.0;
    for (const auto& l : levels_) {
        q += l.quantity;
        n += l.price * l.quantity;
        cum_qty_.push_back(q);
        cum_notional_.push_back(n);
    }
}

double Ladder::min_level_quantity() const {
    double m = levels_.front().quantity;
    for (const auto& l : levels_) m = std::min(m, l.quantity);
    return m;
}

double Ladder::notional(double q) const {
    if (!(q >= 0.0)) fail(ErrorCode::invalid_argument, "quantity must be non-negative");
    const double total = depth();
    if (q > total * (1.0 + 1e-12)) fail(ErrorCode::insufficient_depth, "insufficient depth");
    q = std::min(q, total);
    // First level whose cumulative depth reaches q.
    auto it = std::lower_bound(cum_qty_.begin(), cum_qty_.end(), q);
    auto k = static_cast<std::size_t>(it - cum_qty_.begin());
    if (k >= levels_.size()) k = levels_.size() - 1;
    double before_q = k == 0 ? 0.0 : cum_qty_[k - 1];
    double before_n = k == 0 ? 0.0 : cum_notional_[k - 1];
    return before_n + (q - before_q) * levels_[k].price;
}

double walk_book(const Ladder& ladder, double quantity, double taker_fee) {
    if (!(quantity > 0.0)) fail(ErrorCode::invalid_argument, "quantity must be positive");
    double avg = ladder.notional(quantity) / quantity;
    return ladder.side() == Side::ask ? avg * (1.0 + taker_fee) : avg * (1.0 - taker_fee);
}

double walk_book(Side side, const std::vector<Level>& levels, double quantity, double taker_fee) {
    return walk_book(Ladder(side, levels), quantity, taker_fee);
}

}  // namespace latarb::marketdata
