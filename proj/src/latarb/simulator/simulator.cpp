#include "latarb/simulator/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "latarb/common/error.hpp"
#include "latarb/common/stats.hpp"

namespace latarb::simulator {
namespace {

constexpr double kMinWealth = 0.01;
constexpr double kMaxBreachFraction = 0.001;

void fill_shard(const SimConfig& c, std::size_t shard, Sample& out) {
    const std::size_t begin = shard * SimConfig::kShardSize;
    const std::size_t end = std::min(c.paths, begin + SimConfig::kShardSize);
    boost::random::mt19937_64 rng(shard_seed(c.seed, shard));
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    boost::random::exponential_distribution<double> expo(c.latency.rate);
    boost::random::gamma_distribution<double> gamma(c.latency.shape, 1.0 / c.latency.rate);
    boost::random::uniform_int_distribution<std::size_t> pick(0, c.latency.sample.empty() ? 0 : c.latency.sample.size() - 1);
    for (std::size_t i = begin; i < end; ++i) {
        double tau = 0.0;
        switch (c.latency.law) {
            case LatencyLaw::exponential: tau = expo(rng); break;
            case LatencyLaw::gamma: tau = gamma(rng); break;
            case LatencyLaw::empirical: tau = c.latency.sample[pick(rng)]; break;
        }
        double z = normal(rng);
        out.latencies[i] = tau;
        out.returns[i] = c.delta + c.drift * tau + c.sigma * std::sqrt(tau) * z;
    }
}

}  // namespace

double LatencySpec::mean() const {
    switch (law) {
        case LatencyLaw::exponential: return 1.0 / rate;
        case LatencyLaw::gamma: return shape / rate;
        case LatencyLaw::empirical: return latarb::mean(sample);
    }
    return 0.0;
}

double LatencySpec::variance() const {
    switch (law) {
        case LatencyLaw::exponential: return 1.0 / (rate * rate);
        case LatencyLaw::gamma: return shape / (rate * rate);
        case LatencyLaw::empirical: {
            double m = mean();
            CompensatedSum s;
            for (double t : sample) s.add((t - m) * (t - m));
            return s.value() / static_cast<double>(sample.size());
        }
    }
    return 0.0;
}

void LatencySpec::validate() const {
    switch (law) {
        case LatencyLaw::exponential:
            if (!(rate > 0.0)) fail(ErrorCode::invalid_argument, "exponential latency rate must be positive");
            break;
        case LatencyLaw::gamma:
            if (!(rate > 0.0) || !(shape > 0.0)) fail(ErrorCode::invalid_argument, "gamma latency shape and rate must be positive");
            break;
        case LatencyLaw::empirical:
            if (sample.empty()) fail(ErrorCode::invalid_argument, "empirical latency sample is empty");
            for (double t : sample)
                if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "empirical latencies must be positive");
            break;
    }
}

void SimConfig::validate() const {
    if (paths < 1) fail(ErrorCode::invalid_argument, "paths must be >= 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorCode::invalid_argument, "sigma must be non-negative");
    if (!std::isfinite(drift) || !std::isfinite(delta)) fail(ErrorCode::invalid_argument, "drift and delta must be finite");
    latency.validate();
}

std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (shard + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Sample sample_returns(const SimConfig& config) {
    config.validate();
    Sample out;
    out.returns.resize(config.paths);
    out.latencies.resize(config.paths);
    const std::size_t shards = (config.paths + SimConfig::kShardSize - 1) / SimConfig::kShardSize;
    unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, shards));
    if (workers <= 1) {
        for (std::size_t s = 0; s < shards; ++s) fill_shard(config, s, out);
        return out;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t s = w; s < shards; s += workers) fill_shard(config, s, out);
        });
    for (auto& t : pool) t.join();
    return out;
}

MomentCheck sample_moments(const std::vector<double>& xs) {
    if (xs.size() < 2) fail(ErrorCode::invalid_argument, "need at least two observations");
    const double n = static_cast<double>(xs.size());
    MomentCheck m;
    m.mean = mean(xs);
    CompensatedSum s2, s4;
    for (double x : xs) {
        double d = x - m.mean;
        s2.add(d * d);
        s4.add(d * d * d * d);
    }
    double c2 = s2.value() / n;
    double c4 = s4.value() / n;
    m.variance = s2.value() / (n - 1.0);
    m.mean_se = std::sqrt(m.variance / n);
    m.variance_se = std::sqrt(std::max(0.0, c4 - c2 * c2) / n);
    return m;
}

double laplace_cdf(double x, double location, double scale) {
    double z = (x - location) / scale;
    return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

double kolmogorov_survival(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * t * t);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsReport laplace_check(const std::vector<double>& sample, double delta, double sigma, double lambda) {
    if (sample.empty()) fail(ErrorCode::invalid_argument, "empty sample");
    if (!(sigma > 0.0) || !(lambda > 0.0)) fail(ErrorCode::invalid_argument, "sigma and lambda must be positive");
    std::vector<double> xs = sample;
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    const double scale = sigma / std::sqrt(2.0 * lambda);
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = laplace_cdf(xs[i], delta, scale);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    KsReport r;
    r.distance = d;
    r.critical_value = 1.6276 / std::sqrt(n);
    r.p_value = kolmogorov_survival(std::sqrt(n) * d);
    r.pass = d < r.critical_value;
    return r;
}

CeEstimate ce_estimate(const std::vector<double>& returns, const bounds::Utility& u, CeMode mode) {
    u.validate();
    if (returns.size() < 2) fail(ErrorCode::invalid_argument, "need at least two simulated returns");
    CeEstimate out;
    if (mode == CeMode::full) {
        std::vector<double> utils;
        utils.reserve(returns.size());
        for (double r : returns) {
            bool breach = u.kind == bounds::UtilityKind::crra ? !(u.wealth_offset + r > kMinWealth) : !std::isfinite(r);
            if (breach) {
                ++out.breaches;
                continue;
            }
            utils.push_back(u.value(r));
        }
        if (static_cast<double>(out.breaches) > kMaxBreachFraction * static_cast<double>(returns.size()))
            fail(ErrorCode::domain_error, std::to_string(out.breaches) +
                                              " simulated paths leave the utility domain; lower sigma or shift delta");
        if (utils.size() < 2) fail(ErrorCode::domain_error, "too few paths inside the utility domain");
        if (u.kind == bounds::UtilityKind::linear) {
            std::vector<double> kept;
            for (double r : returns)
                if (std::isfinite(r)) kept.push_back(r);
            MomentCheck m = sample_moments(kept);
            out.ce = m.mean;
            out.se = m.mean_se;
            out.used = kept.size();
            return out;
        }
        MomentCheck m = sample_moments(utils);
        out.ce = u.inverse(m.mean);
        out.se = m.mean_se / u.derivative(out.ce);
        out.used = utils.size();
        return out;
    }

    const double n = static_cast<double>(returns.size());
    const double xbar = mean(returns);
    CompensatedSum s2, s3, s4;
    for (double r : returns) {
        double d = r - xbar;
        s2.add(d * d);
        s3.add(d * d * d);
        s4.add(d * d * d * d);
    }
    const double m2 = s2.value() / n, m3 = s3.value() / n, m4 = s4.value() / n;
    if (!u.in_domain(xbar)) fail(ErrorCode::domain_error, "sample mean outside the utility domain");
    const double c2 = u.taylor_coefficient(2, xbar), c3 = u.taylor_coefficient(3, xbar), c4 = u.taylor_coefficient(4, xbar);
    out.ce = xbar + c2 * m2 + c3 * m3 + c4 * m4;
    out.used = returns.size();
    // Influence function of (mean, m2, m3, m4) pushed through the CE map.
    const double g_mean = 1.0 + u.taylor_coefficient_slope(2, xbar) * m2 + u.taylor_coefficient_slope(3, xbar) * m3 +
                          u.taylor_coefficient_slope(4, xbar) * m4;
    CompensatedSum if2;
    for (double r : returns) {
        double d = r - xbar;
        double d2 = d * d;
        double inf = g_mean * d + c2 * (d2 - m2) + c3 * (d2 * d - m3 - 3.0 * m2 * d) + c4 * (d2 * d2 - m4 - 4.0 * m3 * d);
        if2.add(inf * inf);
    }
    out.se = std::sqrt(if2.value() / (n - 1.0) / n);
    return out;
}

}  // namespace latarb::simulator
