#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "latarb/marketdata/orderbook.hpp"

namespace latarb::marketdata {

struct QuantityGridOptions {
    std::size_t points = 200;
    // Sell q - withdrawal_fee units instead of q (the default only thresholds q).
    bool deduct_withdrawal_fee = false;
};

struct PriceDifference {
    double delta = 0.0;  // log(sell proceeds) - log(buy cost), fees included
    bool no_trade = false;
};

PriceDifference price_difference(const OrderbookSnapshot& buy_book, const OrderbookSnapshot& sell_book,
                                 const ExchangeProfile& buy_profile, const ExchangeProfile& sell_profile, double quantity,
                                 const QuantityGridOptions& options = {});

// Geometric grid from q_min to q_max with exact endpoints, merged with `breakpoints` inside the range.
std::vector<double> quantity_grid(double q_min, double q_max, std::size_t points, const std::vector<double>& breakpoints);

struct QuantityResult {
    double quantity = 0.0;
    double total_return = 0.0;  // currency
    double delta = 0.0;         // net log return at the chosen quantity, 0 when not trading
    std::size_t grid_size = 0;
};

QuantityResult optimal_quantity(const OrderbookSnapshot& buy_book, const OrderbookSnapshot& sell_book,
                                const ExchangeProfile& buy_profile, const ExchangeProfile& sell_profile,
                                const QuantityGridOptions& options = {});

struct FeeGridOptions {
    std::size_t points = 40;  // geometric points besides f = 0
    double min_fee = 1e-6;    // asset units
    double max_fee = 1e-2;
};

std::vector<double> fee_grid(const FeeGridOptions& options);

enum class BindingStatus { binding, slack_objective_limited, slack_depth_limited, no_trade };
const char* binding_status_name(BindingStatus s);

struct FeeQuantityResult {
    double quantity = 0.0;
    double fee = 0.0;
    double total_return = 0.0;
    double delta = 0.0;             // net log return at (q*, f*)
    double bound = 0.0;             // d(f*)
    double residual = 0.0;          // delta - bound
    double residual_step = 0.0;     // change of (delta - d(f*)) to the next quantity grid point
    BindingStatus status = BindingStatus::no_trade;
    bool choice1 = false;           // finite-difference diagnostics, not enforced
    bool choice2 = false;
};

using BoundFunction = std::function<double(double fee)>;

FeeQuantityResult optimal_quantity_fee(const OrderbookSnapshot& buy_book, const OrderbookSnapshot& sell_book,
                                       const ExchangeProfile& buy_profile, const ExchangeProfile& sell_profile,
                                       const BoundFunction& bound_fn, const FeeGridOptions& fee_options = {},
                                       const QuantityGridOptions& quantity_options = {});

// Entry (i, j): buy on exchange j, sell on exchange i. NaN marks a missing exchange.
struct PriceDifferenceMatrix {
    Timestamp timestamp = 0;
    std::vector<std::string> exchanges;
    std::vector<double> delta;
    std::vector<double> quantity;

    std::size_t size() const { return exchanges.size(); }
    double at(std::size_t sell, std::size_t buy) const { return delta[sell * size() + buy]; }
    double quantity_at(std::size_t sell, std::size_t buy) const { return quantity[sell * size() + buy]; }
};

// `books[k]` and `profiles[k]` belong to exchange k; an empty optional marks a missing snapshot.
PriceDifferenceMatrix difference_matrix(Timestamp timestamp, const std::vector<std::string>& exchanges,
                                        const std::vector<std::optional<OrderbookSnapshot>>& books,
                                        const std::vector<ExchangeProfile>& profiles,
                                        const QuantityGridOptions& options = {});

}  // namespace latarb::marketdata
