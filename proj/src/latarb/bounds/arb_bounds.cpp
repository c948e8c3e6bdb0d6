#include "latarb/bounds/arb_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "latarb/common/error.hpp"
#include "latarb/common/log.hpp"

namespace latarb::bounds {
namespace {

void check_latency(double m1, double m2) {
    if (!(m1 > 0.0) || !std::isfinite(m1)) fail(ErrorCode::invalid_argument, "m1 must be positive");
    if (!(m2 >= m1 * m1 * (1.0 - 1e-12)) || !std::isfinite(m2)) fail(ErrorCode::invalid_argument, "m2 must be at least m1^2");
}

void check_sigma(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorCode::invalid_argument, "sigma must be non-negative");
}

}  // namespace

ReturnCentralMoments return_central_moments(double sigma, double drift, const LatencyMoments& l) {
    check_sigma(sigma);
    check_latency(l.m1, l.m2);
    const double s2 = sigma * sigma;
    const double v = std::max(0.0, l.m2 - l.m1 * l.m1);
    ReturnCentralMoments c;
    c.mu2 = drift * drift * v + s2 * l.m1;
    if (drift == 0.0) {
        c.mu3 = 0.0;
        c.mu4 = 3.0 * s2 * s2 * l.m2;
        return c;
    }
    if (std::isnan(l.m3) || std::isnan(l.m4))
        fail(ErrorCode::invalid_argument, "third and fourth latency moments are required with non-zero drift");
    const double m = l.m1;
    const double k3 = l.m3 - 3.0 * m * l.m2 + 2.0 * m * m * m;
    const double k4 = l.m4 - 4.0 * m * l.m3 + 6.0 * m * m * l.m2 - 3.0 * m * m * m * m;
    // E[(tau - m)^2 tau] = E tau^3 - 2 m E tau^2 + m^3
    const double cross = l.m3 - 2.0 * m * l.m2 + m * m * m;
    const double mu = drift;
    c.mu3 = mu * mu * mu * k3 + 3.0 * mu * s2 * v;
    c.mu4 = mu * mu * mu * mu * k4 + 6.0 * mu * mu * s2 * cross + 3.0 * s2 * s2 * l.m2;
    return c;
}

double ce_function(const Utility& u, double d, double drift, double m1, const ReturnCentralMoments& c) {
    const double x = d + m1 * drift;
    if (!u.in_domain(x)) return -std::numeric_limits<double>::infinity();
    return x + u.taylor_coefficient(2, x) * c.mu2 + u.taylor_coefficient(3, x) * c.mu3 + u.taylor_coefficient(4, x) * c.mu4;
}

double ce_root_bound(const Utility& u, double sigma, double drift, const LatencyMoments& latency) {
    u.validate();
    const ReturnCentralMoments c = return_central_moments(sigma, drift, latency);
    if (c.mu2 == 0.0 && c.mu3 == 0.0 && c.mu4 == 0.0) return std::max(0.0, -latency.m1 * drift);
    auto F = [&](double d) { return ce_function(u, d, drift, latency.m1, c); };
    if (F(0.0) >= 0.0) return 0.0;

    double lo = 0.0;
    double hi = sigma * std::sqrt(latency.m2);
    if (!(hi > 0.0)) hi = std::max(1e-12, std::abs(drift) * latency.m1);
    int expansions = 0;
    double f_hi = F(hi);
    while (!(f_hi > 0.0)) {
        if (f_hi == 0.0) return hi;
        lo = hi;
        hi *= 2.0;
        f_hi = F(hi);
        if (++expansions > 200 || !std::isfinite(hi)) {
            std::ostringstream msg;
            msg << "no sign change of the certainty-equivalent function up to d = " << hi << " (sigma " << sigma
                << ", m1 " << latency.m1 << ", m2 " << latency.m2 << ")";
            fail(ErrorCode::no_convergence, msg.str());
        }
    }
    for (int it = 0; it < 2200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double f = F(mid);
        if (f == 0.0) return mid;
        if (f > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double crra_bound(double sigma, double gamma, double m1, double m2) {
    if (!(gamma > 1.0)) fail(ErrorCode::invalid_argument, "closed-form CRRA bound needs gamma > 1; use ce_root_bound");
    check_sigma(sigma);
    check_latency(m1, m2);
    double inner = gamma * gamma * m1 * m1 + 2.0 * gamma * (gamma + 1.0) * (gamma + 2.0) * m2;
    return 0.5 * sigma * std::sqrt(gamma * m1 + std::sqrt(inner));
}

double cara_bound(double sigma, double gamma, double m1, double m2) {
    if (!(gamma > 0.0)) fail(ErrorCode::invalid_argument, "CARA bound needs gamma > 0");
    check_sigma(sigma);
    check_latency(m1, m2);
    double s2 = sigma * sigma;
    return 0.5 * gamma * s2 * m1 + gamma * gamma * gamma / 8.0 * s2 * s2 * m2;
}

double cara_bound_drift(double sigma, double gamma, double drift, const LatencyMoments& latency) {
    if (!(gamma > 0.0)) fail(ErrorCode::invalid_argument, "CARA bound needs gamma > 0");
    ReturnCentralMoments c = return_central_moments(sigma, drift, latency);
    double d = -latency.m1 * drift + gamma / 2.0 * c.mu2 - gamma * gamma / 6.0 * c.mu3 + gamma * gamma * gamma / 24.0 * c.mu4;
    return std::max(0.0, d);
}

Decomposition decompose(double sigma, double gamma, double e_tau, double v_tau, const latency::BlockTimeStats& blocks,
                        int confirmations) {
    auto full = latency::total_latency_moments(e_tau, v_tau, blocks, confirmations);
    auto single = latency::total_latency_moments(e_tau, v_tau, blocks, 1);
    Decomposition out;
    out.bound = crra_bound(sigma, gamma, full.m1, full.m2);
    if (!(out.bound > 0.0)) return out;
    out.security_share = 1.0 - crra_bound(sigma, gamma, single.m1, single.m2) / out.bound;
    out.uncertainty_share = 1.0 - crra_bound(sigma, gamma, full.m1, full.m1 * full.m1) / out.bound;
    return out;
}

double implied_gamma(double delta, double sigma, double c1, double c2) {
    if (!(delta > 0.0) || !(sigma > 0.0) || !(c1 > 0.0)) fail(ErrorCode::invalid_argument, "implied gamma needs delta, sigma, c1 > 0");
    if (!(c2 >= c1 * c1 * (1.0 - 1e-12))) fail(ErrorCode::invalid_argument, "implied gamma needs c2 >= c1^2");
    // Cubic divided by delta^4: 1 - a3 g^3 - a2 g^2 - a1 g, all a_k > 0, so the positive root is unique.
    const double s2 = sigma * sigma;
    const double d2 = delta * delta;
    const double r = s2 / d2;
    const double a3 = r * r * c2 / 8.0;
    const double a2 = 3.0 * r * r * c2 / 8.0;
    const double a1 = 0.5 * r * c1 + 0.25 * r * r * c2;
    auto p = [&](double g) { return 1.0 - ((a3 * g + a2) * g + a1) * g; };
    auto dp = [&](double g) { return -((3.0 * a3 * g + 2.0 * a2) * g + a1); };
    double lo = 0.0, hi = 1.0;
    int expansions = 0;
    while (p(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 2000 || !std::isfinite(hi)) fail(ErrorCode::no_convergence, "implied gamma: no bracketing root");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (p(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-10 * hi) break;
    }
    double g = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        double next = g - p(g) / dp(g);
        if (!(next > lo && next < hi) && hi - lo > 0.0) break;
        g = next;
    }
    return g;
}

double implied_gamma_market(const std::vector<ImpliedGammaInput>& pairs) {
    double best = kNaN;
    for (const auto& in : pairs) {
        if (!(in.delta > 0.0)) continue;
        double g = implied_gamma(in.delta, in.sigma, in.c1, in.c2);
        if (std::isnan(best) || g > best) best = g;
    }
    return best;
}

std::vector<double> bound_fee_response(const latency::LatencyModel& model, std::vector<double> covariates,
                                       const std::vector<double>& fees, const FeeResponseInputs& in) {
    if (in.fee_covariate >= model.schema.size()) fail(ErrorCode::schema_mismatch, "model has no fee covariate at that position");
    if (model.theta.at(in.fee_covariate + 1) > 0.0)
        log::warn("fee coefficient is positive; the fee response is increasing and fee conditions cannot hold");
    std::vector<double> out;
    out.reserve(fees.size());
    for (double f : fees) {
        covariates.at(in.fee_covariate) = f;
        latency::Moments mom = latency::predict_moments(model, covariates);
        auto total = latency::total_latency_moments(mom.mean, mom.variance, in.blocks, in.confirmations);
        out.push_back(crra_bound(in.sigma, in.gamma, total.m1, total.m2));
    }
    return out;
}

ExcessResult excess_differences(const marketdata::PriceDifferenceMatrix& matrix, const std::vector<double>& bounds) {
    const std::size_t n = matrix.size();
    if (bounds.size() != n) fail(ErrorCode::invalid_argument, "one bound per sell-side exchange is required");
    ExcessResult r;
    r.excess.assign(n * n, kNaN);
    r.within.assign(n * n, -1);
    for (std::size_t sell = 0; sell < n; ++sell) {
        for (std::size_t buy = 0; buy < n; ++buy) {
            std::size_t k = sell * n + buy;
            double delta = matrix.delta[k];
            double d = bounds[sell];
            if (std::isnan(delta) || std::isnan(d)) continue;
            bool above = delta > d;
            r.excess[k] = above ? delta - d : 0.0;
            if (delta > 0.0) {
                r.within[k] = above ? 0 : 1;
                ++r.positive;
                if (!above) ++r.positive_within;
            }
        }
    }
    return r;
}

}  // namespace latarb::bounds
