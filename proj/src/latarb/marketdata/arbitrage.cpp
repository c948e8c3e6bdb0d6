#include "latarb/marketdata/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latarb/common/error.hpp"

namespace latarb::marketdata {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Pair {
    Ladder bids;  // sell side
    Ladder asks;  // buy side
    double sell_fee;
    double buy_fee;
    double withdrawal;
    bool deduct;

    Pair(const OrderbookSnapshot& buy_book, const OrderbookSnapshot& sell_book, const ExchangeProfile& buy_profile,
         const ExchangeProfile& sell_profile, bool deduct_withdrawal)
        : bids(Side::bid, sell_book.bids),
          asks(Side::ask, buy_book.asks),
          sell_fee(sell_profile.taker_fee),
          buy_fee(buy_profile.taker_fee),
          withdrawal(buy_profile.withdrawal_fee_or_default()),
          deduct(deduct_withdrawal) {}

    double sold(double q) const { return deduct ? q - withdrawal : q; }
    double proceeds(double q) const { return bids.notional(sold(q)) * (1.0 - sell_fee); }
    double cost(double q) const { return asks.notional(q) * (1.0 + buy_fee); }
    double q_min() const { return std::min(bids.min_level_quantity(), asks.min_level_quantity()); }
    double sell_capacity() const { return deduct ? bids.depth() + withdrawal : bids.depth(); }

    std::vector<double> breakpoints(double fee) const {
        std::vector<double> b;
        for (double c : asks.cumulative_depth()) b.push_back(c - fee);
        for (double c : bids.cumulative_depth()) b.push_back(deduct ? c + withdrawal : c);
        return b;
    }

    // Net log return per unit with the settlement fee bought on top of q.
    double net_return(double q, double fee) const {
        double s = sold(q);
        return std::log(bids.notional(s) * (1.0 - sell_fee) / s) - std::log(asks.notional(q + fee) * (1.0 + buy_fee) / (q + fee));
    }

    // rho^{s,B}(q): relative discount of the fee-adjusted average sell price to the best bid.
    double rho_sell(double q) const { return 1.0 - bids.notional(q) * (1.0 - sell_fee) / (q * bids.best_price()); }
};

}  // namespace

std::vector<double> quantity_grid(double q_min, double q_max, std::size_t points, const std::vector<double>& breakpoints) {
    std::vector<double> grid;
    if (!(q_max > 0.0)) return grid;
    if (!(q_min > 0.0) || q_min >= q_max || points < 2) {
        grid.push_back(q_max);
    } else {
        grid.reserve(points + breakpoints.size());
        double ratio = std::log(q_max / q_min);
        grid.push_back(q_min);
        for (std::size_t i = 1; i + 1 < points; ++i)
            grid.push_back(q_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(points - 1)));
        grid.push_back(q_max);
    }
    for (double b : breakpoints)
        if (b > 0.0 && b <= q_max) grid.push_back(b);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

PriceDifference price_difference(const OrderbookSnapshot& buy_book, const OrderbookSnapshot& sell_book,
                                 const ExchangeProfile& buy_profile, const ExchangeProfile& sell_profile, double quantity,
                                 const QuantityGridOptions& options) {
    if (!(quantity > 0.0)) fail(ErrorCode::invalid_argument, "quantity must be positive");
    Pair p(buy_book, sell_book, buy_profile, sell_profile, options.deduct_withdrawal_fee);
    if (quantity <= p.withdrawal) return {0.0, true};
    return {std::log(p.proceeds(quantity) / p.cost(quantity)), false};
}

QuantityResult optimal_quantity(const OrderbookSnapshot& buy_book, const OrderbookSnapshot& sell_book,
                                const ExchangeProfile& buy_profile, const ExchangeProfile& sell_profile,
                                const QuantityGridOptions& options) {
    Pair p(buy_book, sell_book, buy_profile, sell_profile, options.deduct_withdrawal_fee);
    double q_max = std::min(p.asks.depth(), p.sell_capacity());
    std::vector<double> grid = quantity_grid(p.q_min(), q_max, options.points, p.breakpoints(0.0));
    QuantityResult best;
    best.grid_size = grid.size();
    double best_ret = -std::numeric_limits<double>::infinity();
    double best_q = 0.0, best_delta = 0.0;
    for (double q : grid) {
        if (!(p.sold(q) > 0.0)) continue;
        double proceeds = p.proceeds(q);
        double cost = p.cost(q);
        double ret = proceeds - cost;
        if (ret > best_ret) {
            best_ret = ret;
            best_q = q;
            best_delta = std::log(proceeds / cost);
        }
    }
    if (!(best_ret > 0.0) || best_q <= p.withdrawal) return best;
    best.quantity = best_q;
    best.total_return = best_ret;
    best.delta = best_delta;
    return best;
}

std::vector<double> fee_grid(const FeeGridOptions& options) {
    if (!(options.min_fee > 0.0) || !(options.max_fee >= options.min_fee))
        fail(ErrorCode::invalid_argument, "fee grid needs 0 < min_fee <= max_fee");
    std::vector<double> grid{0.0};
    if (options.points == 0) return grid;
    if (options.points == 1 || options.max_fee == options.min_fee) {
        grid.push_back(options.min_fee);
        return grid;
    }
    double ratio = std::log(options.max_fee / options.min_fee);
    for (std::size_t i = 0; i < options.points; ++i) {
        if (i == 0)
            grid.push_back(options.min_fee);
        else if (i + 1 == options.points)
            grid.push_back(options.max_fee);
        else
            grid.push_back(options.min_fee * std::exp(ratio * static_cast<double>(i) / static_cast<double>(options.points - 1)));
    }
    return grid;
}

const char* binding_status_name(BindingStatus s) {
    switch (s) {
        case BindingStatus::binding: return "binding";
        case BindingStatus::slack_objective_limited: return "slack_objective_limited";
        case BindingStatus::slack_depth_limited: return "slack_depth_limited";
        case BindingStatus::no_trade: return "no_trade";
    }
    return "?";
}

FeeQuantityResult optimal_quantity_fee(const OrderbookSnapshot& buy_book, const OrderbookSnapshot& sell_book,
                                       const ExchangeProfile& buy_profile, const ExchangeProfile& sell_profile,
                                       const BoundFunction& bound_fn, const FeeGridOptions& fee_options,
                                       const QuantityGridOptions& quantity_options) {
    Pair p(buy_book, sell_book, buy_profile, sell_profile, quantity_options.deduct_withdrawal_fee);
    FeeQuantityResult out;
    double best_ret = -std::numeric_limits<double>::infinity();
    std::vector<double> best_grid;
    std::size_t best_index = 0;
    double best_fee = 0.0, best_bound = 0.0;

    for (double f : fee_grid(fee_options)) {
        double q_max = std::min(p.asks.depth() - f, p.sell_capacity());
        std::vector<double> grid = quantity_grid(p.q_min(), q_max, quantity_options.points, p.breakpoints(f));
        if (grid.empty()) continue;
        double d = bound_fn(f);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double q = grid[i];
            if (!(p.sold(q) > 0.0)) continue;
            if (p.net_return(q, f) < d) continue;
            double ret = p.proceeds(q) - p.cost(q + f);
            if (ret > best_ret) {
                best_ret = ret;
                best_grid = grid;
                best_index = i;
                best_fee = f;
                best_bound = d;
            }
        }
    }
    if (!(best_ret > 0.0)) return out;
    double q = best_grid[best_index];
    if (q <= p.withdrawal) return out;

    out.quantity = q;
    out.fee = best_fee;
    out.total_return = best_ret;
    out.delta = p.net_return(q, best_fee);
    out.bound = best_bound;
    out.residual = out.delta - best_bound;
    bool last = best_index + 1 == best_grid.size();
    if (best_grid.size() > 1) {
        std::size_t nb = last ? best_index - 1 : best_index + 1;
        out.residual_step = std::abs(p.net_return(best_grid[nb], best_fee) - out.delta);
    }
    if (out.residual <= out.residual_step)
        out.status = BindingStatus::binding;
    else
        out.status = last ? BindingStatus::slack_depth_limited : BindingStatus::slack_objective_limited;

    double sell_units = p.sold(q);
    double h = std::max(1e-9, 1e-6 * sell_units);
    double lo = std::max(sell_units - h, 0.5 * sell_units);
    double hi = std::min(sell_units + h, p.bids.depth());
    double rho = p.rho_sell(sell_units);
    double drho = hi > lo ? (p.rho_sell(hi) - p.rho_sell(lo)) / (hi - lo) : 0.0;
    double hf = std::max(1e-9, 1e-4 * best_fee);
    double dd = (bound_fn(best_fee + hf) - best_bound) / hf;
    out.choice1 = (1.0 - rho) / sell_units > drho;
    out.choice2 = -dd > drho / (1.0 + rho);
    return out;
}

PriceDifferenceMatrix difference_matrix(Timestamp timestamp, const std::vector<std::string>& exchanges,
                                        const std::vector<std::optional<OrderbookSnapshot>>& books,
                                        const std::vector<ExchangeProfile>& profiles, const QuantityGridOptions& options) {
    const std::size_t n = exchanges.size();
    if (books.size() != n || profiles.size() != n) fail(ErrorCode::invalid_argument, "exchange, book and profile lists differ in length");
    std::size_t present = static_cast<std::size_t>(std::count_if(books.begin(), books.end(), [](const auto& b) { return b.has_value(); }));
    if (present < 2) fail(ErrorCode::invalid_argument, "difference matrix needs at least two exchanges with books");
    PriceDifferenceMatrix m;
    m.timestamp = timestamp;
    m.exchanges = exchanges;
    m.delta.assign(n * n, kNaN);
    m.quantity.assign(n * n, kNaN);
    for (std::size_t sell = 0; sell < n; ++sell) {
        for (std::size_t buy = 0; buy < n; ++buy) {
            std::size_t k = sell * n + buy;
            if (sell == buy) {
                m.delta[k] = 0.0;
                m.quantity[k] = 0.0;
                continue;
            }
            if (!books[sell] || !books[buy]) continue;
            QuantityResult r = optimal_quantity(*books[buy], *books[sell], profiles[buy], profiles[sell], options);
            m.delta[k] = std::max(0.0, r.delta);
            m.quantity[k] = r.quantity;
        }
    }
    return m;
}

}  // namespace latarb::marketdata
