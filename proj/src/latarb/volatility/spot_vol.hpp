#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latarb/common/time.hpp"

namespace latarb::volatility {

// Log best bids on a contiguous minute grid; NaN marks a missing minute.
struct BidSeries {
    std::string exchange;
    std::int64_t first_minute = 0;  // minutes since epoch of log_bid[0]
    std::vector<double> log_bid;

    std::size_t size() const { return log_bid.size(); }
    std::int64_t minute_at(std::size_t i) const { return first_minute + static_cast<std::int64_t>(i); }
    // Index of a minute, or -1 when outside the grid.
    std::int64_t index_of(std::int64_t minute) const;
    // (b_i - b_{i-1})^2, NaN when either side is missing.
    double squared_return(std::size_t i) const;
};

const std::vector<double>& default_bandwidth_grid();
constexpr double kDefaultBandwidth = 60.0;

// Number of kernel lags used for bandwidth h: lags 0..ceil(5h).
std::size_t kernel_lags(double h);

// Normalized one-sided Gaussian kernel estimate at index t using returns at t - j, j >= min_lag.
// Throws insufficient_history when no usable return is in the window.
double spot_variance(const BidSeries& series, std::size_t t, double h, std::size_t min_lag = 0);

struct BandwidthChoice {
    double h = kDefaultBandwidth;
    bool fallback = false;
    std::vector<double> ise;  // per grid entry, empty on fallback
};

// Minimizes the squared error between squared returns and leave-current-out estimates on day - 1.
BandwidthChoice select_bandwidth(const BidSeries& series, Day day, const std::vector<double>& grid = default_bandwidth_grid(),
                                 double default_h = kDefaultBandwidth);

struct SpotVolPoint {
    std::int64_t minute = 0;
    double sigma = 0.0;  // per sqrt(minute)
    double bandwidth = 0.0;
    bool trimmed = false;
};

// Estimates for every minute of `day` that has usable history; trimming is left to trim_tails.
std::vector<SpotVolPoint> estimate_day(const BidSeries& series, Day day, const std::vector<double>& grid = default_bandwidth_grid(),
                                       double default_h = kDefaultBandwidth);

// Flags non-positive estimates and estimates outside the [p, 1 - p] type-7 quantiles of the positive ones.
void trim_tails(std::vector<SpotVolPoint>& points, double p = 0.01);

}  // namespace latarb::volatility
