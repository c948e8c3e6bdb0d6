#include "latarb/volatility/spot_vol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latarb/common/error.hpp"
#include "latarb/common/log.hpp"
#include "latarb/common/stats.hpp"

namespace latarb::volatility {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::pair<std::size_t, std::size_t> day_range(const BidSeries& s, Day day) {
    std::int64_t lo = day * kMinutesPerDay - s.first_minute;
    std::int64_t hi = lo + kMinutesPerDay;
    lo = std::clamp<std::int64_t>(lo, 0, static_cast<std::int64_t>(s.size()));
    hi = std::clamp<std::int64_t>(hi, 0, static_cast<std::int64_t>(s.size()));
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

std::vector<double> kernel_weights(double h) {
    std::vector<double> w(kernel_lags(h) + 1);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::exp(-static_cast<double>(j * j) / (2.0 * h * h));
    return w;
}

// Estimate or NaN when the window holds no usable return.
double try_spot_variance(const BidSeries& s, std::size_t t, const std::vector<double>& weights, std::size_t min_lag) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = min_lag; j < weights.size() && j <= t; ++j) {
        double r2 = s.squared_return(t - j);
        if (std::isnan(r2)) continue;
        num += weights[j] * r2;
        den += weights[j];
    }
    if (!(den > 0.0)) return kNaN;
    return num / den;
}

}  // namespace

std::int64_t BidSeries::index_of(std::int64_t minute) const {
    std::int64_t i = minute - first_minute;
    return i >= 0 && i < static_cast<std::int64_t>(size()) ? i : -1;
}

double BidSeries::squared_return(std::size_t i) const {
    if (i == 0 || i >= size()) return kNaN;
    double r = log_bid[i] - log_bid[i - 1];
    return r * r;
}

const std::vector<double>& default_bandwidth_grid() {
    static const std::vector<double> grid{5, 10, 20, 30, 60, 120, 240};
    return grid;
}

std::size_t kernel_lags(double h) { return static_cast<std::size_t>(std::ceil(5.0 * h)); }

double spot_variance(const BidSeries& series, std::size_t t, double h, std::size_t min_lag) {
    if (!(h > 0.0)) fail(ErrorCode::invalid_argument, "bandwidth must be positive");
    if (t >= series.size()) fail(ErrorCode::invalid_argument, "minute index outside the series");
    double v = try_spot_variance(series, t, kernel_weights(h), min_lag);
    if (std::isnan(v)) fail(ErrorCode::insufficient_history, "insufficient history for spot variance");
    return v;
}

BandwidthChoice select_bandwidth(const BidSeries& series, Day day, const std::vector<double>& grid, double default_h) {
    if (grid.empty()) fail(ErrorCode::invalid_argument, "empty bandwidth grid");
    for (double h : grid)
        if (!(h > 0.0)) fail(ErrorCode::invalid_argument, "bandwidths must be positive");
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());

    BandwidthChoice choice;
    choice.h = default_h;
    auto [lo, hi] = day_range(series, day - 1);
    std::vector<CompensatedSum> ise(sorted.size());
    std::size_t used = 0;
    std::vector<double> est(sorted.size());
    std::vector<std::vector<double>> weights;
    for (double h : sorted) weights.push_back(kernel_weights(h));
    for (std::size_t l = lo; l < hi; ++l) {
        double r2 = series.squared_return(l);
        if (std::isnan(r2)) continue;
        bool ok = true;
        for (std::size_t k = 0; k < sorted.size() && ok; ++k) {
            est[k] = try_spot_variance(series, l, weights[k], 1);
            ok = !std::isnan(est[k]);
        }
        if (!ok) continue;
        for (std::size_t k = 0; k < sorted.size(); ++k) ise[k].add((r2 - est[k]) * (r2 - est[k]));
        ++used;
    }
    if (used == 0) {
        choice.fallback = true;
        log::warn(series.exchange + ": no usable data on " + format_date(day - 1) + ", using default bandwidth " +
                  std::to_string(default_h));
        return choice;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        double v = ise[k].value();
        choice.ise.push_back(v);
        if (v <= best) {
            best = v;
            choice.h = sorted[k];
        }
    }
    return choice;
}

std::vector<SpotVolPoint> estimate_day(const BidSeries& series, Day day, const std::vector<double>& grid, double default_h) {
    BandwidthChoice bw = select_bandwidth(series, day, grid, default_h);
    auto [lo, hi] = day_range(series, day);
    std::vector<SpotVolPoint> out;
    const std::vector<double> weights = kernel_weights(bw.h);
    for (std::size_t t = lo; t < hi; ++t) {
        double v = try_spot_variance(series, t, weights, 0);
        if (std::isnan(v)) continue;
        out.push_back({series.minute_at(t), std::sqrt(v), bw.h, false});
    }
    return out;
}

void trim_tails(std::vector<SpotVolPoint>& points, double p) {
    std::vector<double> positive;
    for (const auto& pt : points)
        if (pt.sigma > 0.0) positive.push_back(pt.sigma);
    if (positive.empty()) {
        for (auto& pt : points) pt.trimmed = true;
        return;
    }
    std::sort(positive.begin(), positive.end());
    double lo = quantile_sorted(positive, p);
    double hi = quantile_sorted(positive, 1.0 - p);
    for (auto& pt : points) pt.trimmed = !(pt.sigma > 0.0) || pt.sigma < lo || pt.sigma > hi;
}

}  // namespace latarb::volatility
