#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "latarb/bounds/utility.hpp"
#include "latarb/latency/duration_model.hpp"
#include "latarb/marketdata/arbitrage.hpp"

namespace latarb::bounds {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Raw latency moments E(tau^k); m3 and m4 are only needed with drift.
struct LatencyMoments {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = kNaN;
    double m4 = kNaN;
};

struct ReturnCentralMoments {
    double mu2 = 0.0;
    double mu3 = 0.0;
    double mu4 = 0.0;
};

// Central moments of r = mu tau + sigma W_tau (around its mean).
ReturnCentralMoments return_central_moments(double sigma, double drift, const LatencyMoments& latency);

// F(d) = x + sum_{k=2..4} U^(k)(x) / (k! U'(x)) mu_k with x = d + m1 mu; -inf outside the utility domain.
double ce_function(const Utility& u, double d, double drift, double m1, const ReturnCentralMoments& central);

// max(0, root of F); bracket [0, sigma sqrt(m2)] expanded until F > 0, then bisection.
double ce_root_bound(const Utility& u, double sigma, double drift, const LatencyMoments& latency);

double crra_bound(double sigma, double gamma, double m1, double m2);
double cara_bound(double sigma, double gamma, double m1, double m2);
double cara_bound_drift(double sigma, double gamma, double drift, const LatencyMoments& latency);

struct Decomposition {
    double bound = 0.0;
    double security_share = kNaN;
    double uncertainty_share = kNaN;
};

// Security share 1 - d(B=1)/d(B); uncertainty share 1 - d(V = V_B = 0)/d. Both NaN when d = 0.
Decomposition decompose(double sigma, double gamma, double e_tau, double v_tau, const latency::BlockTimeStats& blocks,
                        int confirmations);

// Unique positive root of the implied-risk-aversion cubic.
double implied_gamma(double delta, double sigma, double c1, double c2);

struct ImpliedGammaInput {
    double delta = 0.0;
    double sigma = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

// Max over pairs with positive delta; NaN when none qualifies.
double implied_gamma_market(const std::vector<ImpliedGammaInput>& pairs);

struct FeeResponseInputs {
    double sigma = 0.0;
    double gamma = 2.0;
    latency::BlockTimeStats blocks;
    int confirmations = 1;
    std::size_t fee_covariate = 0;  // position of the fee in the model schema
};

// d(f) = crra_bound with latency moments predicted at fee f (other covariates from `covariates`).
std::vector<double> bound_fee_response(const latency::LatencyModel& model, std::vector<double> covariates,
                                       const std::vector<double>& fees, const FeeResponseInputs& inputs);

struct ExcessResult {
    std::vector<double> excess;     // same layout as the difference matrix
    std::vector<int> within;        // 1 when 0 < delta <= bound, -1 where delta is missing or not positive
    std::size_t positive = 0;
    std::size_t positive_within = 0;
    double share_within() const { return positive ? static_cast<double>(positive_within) / static_cast<double>(positive) : kNaN; }
};

// `bounds[i]` is the bound of sell-side exchange i.
ExcessResult excess_differences(const marketdata::PriceDifferenceMatrix& matrix, const std::vector<double>& bounds);

}  // namespace latarb::bounds
