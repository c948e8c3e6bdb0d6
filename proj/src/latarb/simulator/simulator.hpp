#pragma once

#include <cstdint>
#include <vector>

#include "latarb/bounds/utility.hpp"

namespace latarb::simulator {

enum class LatencyLaw { exponential, gamma, empirical };

// Gamma latency uses shape `shape` and rate `rate`, so E(tau) = shape / rate.
struct LatencySpec {
    LatencyLaw law = LatencyLaw::exponential;
    double rate = 1.0;
    double shape = 1.0;
    std::vector<double> sample;  // empirical law, drawn uniformly with replacement

    double mean() const;
    double variance() const;
    void validate() const;
};

struct SimConfig {
    std::uint64_t seed = 0;
    std::size_t paths = 1'000'000;
    double sigma = 0.0;  // per sqrt(minute)
    double drift = 0.0;  // per minute
    double delta = 0.0;
    LatencySpec latency;
    unsigned threads = 0;  // 0 = hardware concurrency

    static constexpr std::size_t kShardSize = 65536;
    void validate() const;
};

// splitmix64 finalizer of (seed, stream); used to seed each shard's generator.
std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard);

struct Sample {
    std::vector<double> returns;
    std::vector<double> latencies;
};

// r = delta + drift tau + sigma sqrt(tau) Z with exact terminal sampling; deterministic for a seed
// regardless of the thread count.
Sample sample_returns(const SimConfig& config);

struct MomentCheck {
    double mean = 0.0;
    double mean_se = 0.0;
    double variance = 0.0;
    double variance_se = 0.0;
};

MomentCheck sample_moments(const std::vector<double>& xs);

struct KsReport {
    double distance = 0.0;
    double critical_value = 0.0;  // 1% level
    double p_value = 1.0;
    bool pass = false;
};

double laplace_cdf(double x, double location, double scale);
// Asymptotic Kolmogorov survival function P(sqrt(n) D > t).
double kolmogorov_survival(double t);

// KS distance to Laplace(delta, sigma / sqrt(2 lambda)).
KsReport laplace_check(const std::vector<double>& sample, double delta, double sigma, double lambda);

enum class CeMode { full, truncated };

struct CeEstimate {
    double ce = 0.0;
    double se = 0.0;
    std::size_t used = 0;
    std::size_t breaches = 0;
};

// Full: U^{-1}(mean U(r)), SE = SE(mean U) / U'(CE); paths with wealth <= 0.01 (CRRA) are rejected and counted,
// more than 0.1% of them raise domain_error.
// Truncated: order-4 Taylor CE at the sample mean with sample central moments, SE by the delta method.
CeEstimate ce_estimate(const std::vector<double>& returns, const bounds::Utility& utility, CeMode mode);

}  // namespace latarb::simulator
