#include <doctest.h>

#include <cmath>
#include <random>

#include "latarb/bounds/arb_bounds.hpp"
#include "latarb/common/error.hpp"
#include "support/oracles.hpp"

using namespace latarb;
using namespace latarb::bounds;

namespace {

struct Draw {
    double sigma, gamma, m1, m2;
};

Draw random_inputs(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Draw d;
    d.sigma = 1e-4 * std::pow(100.0, u(rng));
    d.gamma = 1.05 + 30.0 * u(rng);
    d.m1 = 0.5 + 60.0 * u(rng);
    d.m2 = d.m1 * d.m1 * (1.0 + 3.0 * u(rng));
    return d;
}

}  // namespace

TEST_CASE("closed-form examples") {
    CHECK(crra_bound(0.0, 2.0, 29.4, 1340.72) == 0.0);
    CHECK(cara_bound(0.0, 2.0, 29.4, 1340.72) == 0.0);
    CHECK(cara_bound(1.0, 1.0, 1.0, 1.0) == doctest::Approx(0.625));
    CHECK(ce_root_bound(Utility::crra(2.0), 0.0, 0.0, {29.4, 1340.72}) == 0.0);

    double d = crra_bound(0.0009, 2.0, 29.4, 1340.72);
    CHECK(d == doctest::Approx(oracle::crra_root(0.0009, 2.0, 29.4, 1340.72)).epsilon(1e-10));
    CHECK(d == doctest::Approx(ce_root_bound(Utility::crra(2.0), 0.0009, 0.0, {29.4, 1340.72})).epsilon(1e-10));
    CHECK(crra_bound(0.0009, 2.0, 29.4, 29.4 * 29.4) < d);

    CHECK_THROWS_AS(crra_bound(0.001, 1.0, 1.0, 1.0), Error);
    CHECK_THROWS_AS(crra_bound(0.001, 2.0, 2.0, 1.0), Error);
    CHECK_THROWS_AS(crra_bound(-0.001, 2.0, 1.0, 1.0), Error);
    CHECK_THROWS_AS(ce_root_bound(Utility::cara(2.0), 0.001, 0.001, {1.0, 1.0}), Error);
}

TEST_CASE("closed forms agree with the root finder and the bisection oracle") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 1000; ++rep) {
        auto in = random_inputs(rng);
        double c = crra_bound(in.sigma, in.gamma, in.m1, in.m2);
        CHECK(ce_root_bound(Utility::crra(in.gamma), in.sigma, 0.0, {in.m1, in.m2}) == doctest::Approx(c).epsilon(1e-10));
        CHECK(oracle::crra_root(in.sigma, in.gamma, in.m1, in.m2) == doctest::Approx(c).epsilon(1e-10));
        double a = cara_bound(in.sigma, in.gamma, in.m1, in.m2);
        CHECK(ce_root_bound(Utility::cara(in.gamma), in.sigma, 0.0, {in.m1, in.m2}) == doctest::Approx(a).epsilon(1e-8));
    }
}

TEST_CASE("crra_bound is increasing in every argument and homogeneous in sigma") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 500; ++rep) {
        auto in = random_inputs(rng);
        double d = crra_bound(in.sigma, in.gamma, in.m1, in.m2);
        CHECK(crra_bound(in.sigma * 1.01, in.gamma, in.m1, in.m2) > d);
        CHECK(crra_bound(in.sigma, in.gamma * 1.01, in.m1, in.m2) > d);
        CHECK(crra_bound(in.sigma, in.gamma, in.m1 * 1.001, in.m2) > d);
        CHECK(crra_bound(in.sigma, in.gamma, in.m1, in.m2 * 1.01) > d);
        CHECK(crra_bound(in.sigma * 7.0, in.gamma, in.m1, in.m2) == doctest::Approx(7.0 * d).epsilon(1e-14));
    }
}

TEST_CASE("drifted return moments and the drift-aware CARA bound") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        double sigma = 1e-3 * (0.2 + u(rng)), mu = 2e-4 * (u(rng) - 0.5), gamma = 1.0 + 20.0 * u(rng);
        auto r = latency::gamma_raw_moments(0.3 + 3.0 * u(rng), 0.05 + u(rng));
        LatencyMoments l{r.m1, r.m2, r.m3, r.m4};
        auto c = return_central_moments(sigma, mu, l);
        auto o = oracle::mixture_central(sigma, mu, r.m1, r.m2, r.m3, r.m4);
        CHECK(c.mu2 == doctest::Approx(o.mu2).epsilon(1e-9));
        CHECK(c.mu3 == doctest::Approx(o.mu3).epsilon(1e-7).scale(1e-18));
        CHECK(c.mu4 == doctest::Approx(o.mu4).epsilon(1e-7));
        double closed = cara_bound_drift(sigma, gamma, mu, l);
        double root = ce_root_bound(Utility::cara(gamma), sigma, mu, l);
        CHECK(root == doctest::Approx(closed).epsilon(1e-8).scale(1e-14));
    }
    auto r = latency::gamma_raw_moments(0.62, 0.05);
    LatencyMoments l{r.m1, r.m2, r.m3, r.m4};
    CHECK(cara_bound_drift(0.001, 3.0, 0.0, l) == doctest::Approx(cara_bound(0.001, 3.0, r.m1, r.m2)).epsilon(1e-12));
}

TEST_CASE("decomposition into security and uncertainty shares") {
    latency::BlockTimeStats blocks{9.7, 94.09};
    auto one = decompose(0.0009, 2.0, 10.0, 100.0, blocks, 1);
    CHECK(one.security_share == 0.0);
    CHECK(decompose(0.0009, 2.0, 10.0, 0.0, {9.7, 0.0}, 3).uncertainty_share == doctest::Approx(0.0).scale(1e-12));

    auto three = decompose(0.0009, 2.0, 10.0, 100.0, blocks, 3);
    // direct recomputation with the hand-evaluated moments (29.4, 1340.72) and B = 1 moments (10, 200)
    double full = crra_bound(0.0009, 2.0, 29.4, 1340.72);
    CHECK(three.bound == doctest::Approx(full).epsilon(1e-12));
    CHECK(three.security_share == doctest::Approx(1.0 - crra_bound(0.0009, 2.0, 10.0, 200.0) / full).epsilon(1e-12));
    CHECK(three.uncertainty_share == doctest::Approx(1.0 - crra_bound(0.0009, 2.0, 29.4, 29.4 * 29.4) / full).epsilon(1e-12));
    CHECK(three.security_share > 0.0);
    CHECK(three.security_share < 1.0);
    CHECK(three.uncertainty_share > 0.0);
    CHECK(three.uncertainty_share < 1.0);

    double prev = 0.0;
    for (int b = 1; b <= 10; ++b) {
        double d = decompose(0.0009, 2.0, 10.0, 100.0, blocks, b).bound;
        CHECK(d > prev);
        prev = d;
    }
    auto flat = decompose(0.0, 2.0, 10.0, 100.0, blocks, 3);
    CHECK(flat.bound == 0.0);
    CHECK(std::isnan(flat.security_share));
    CHECK(std::isnan(flat.uncertainty_share));
}

TEST_CASE("implied risk aversion inverts the closed form") {
    CHECK(implied_gamma(crra_bound(0.0009, 2.0, 29.4, 1340.72), 0.0009, 29.4, 1340.72) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(implied_gamma(1e-9, 0.0009, 29.4, 1340.72) < 1e-6);
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 500; ++rep) {
        auto in = random_inputs(rng);
        double delta = crra_bound(in.sigma, in.gamma, in.m1, in.m2);
        double g = implied_gamma(delta, in.sigma, in.m1, in.m2);
        CHECK(g == doctest::Approx(in.gamma).epsilon(1e-8));
        CHECK(g == doctest::Approx(oracle::implied_gamma_bisect(delta, in.sigma, in.m1, in.m2)).epsilon(1e-8));
        CHECK(implied_gamma(crra_bound(in.sigma, 5.0, in.m1, in.m2), in.sigma, in.m1, in.m2) == doctest::Approx(5.0).epsilon(1e-8));
    }
    std::vector<ImpliedGammaInput> pairs{{crra_bound(0.001, 3.0, 10, 200), 0.001, 10, 200},
                                         {crra_bound(0.002, 9.0, 20, 500), 0.002, 20, 500},
                                         {crra_bound(0.001, 4.0, 5, 30), 0.001, 5, 30},
                                         {-0.01, 0.001, 5, 30}};
    CHECK(implied_gamma_market(pairs) == doctest::Approx(9.0).epsilon(1e-8));
    CHECK(std::isnan(implied_gamma_market({{0.0, 0.001, 5, 30}})));
    CHECK_THROWS_AS(implied_gamma(0.01, 0.001, 10.0, 50.0), Error);
}

TEST_CASE("bound response to the settlement fee") {
    latency::LatencyModel m;
    m.alpha = 0.62;
    m.theta = {1.19, -0.22, 0.31};
    m.schema = latency::default_covariates();
    FeeResponseInputs in;
    in.sigma = 0.0009;
    in.blocks = {9.7, 94.09};
    in.confirmations = 3;
    std::vector<double> fees{0.0, 1.0, 5.0, 20.0, 100.0, 1000.0};
    auto curve = bound_fee_response(m, {14.0, 4500.0}, fees, in);
    for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] < curve[k - 1]);

    auto far = bound_fee_response(m, {14.0, 4500.0}, {1e200}, in);
    double m1 = 9.7 * 2, m2 = 94.09 * 4 + m1 * m1;
    CHECK(far[0] == doctest::Approx(crra_bound(0.0009, 2.0, m1, m2)).epsilon(1e-9));

    m.theta[1] = 0.0;
    auto flat = bound_fee_response(m, {14.0, 4500.0}, fees, in);
    for (double d : flat) CHECK(d == flat[0]);
}

TEST_CASE("excess differences") {
    marketdata::PriceDifferenceMatrix mat;
    mat.exchanges = {"a", "b", "c"};
    // rows: sell exchange, columns: buy exchange
    mat.delta = {0.0, 0.004, 0.0,  //
                 0.010, 0.0, 0.002,  //
                 std::nan(""), 0.0007, 0.0};
    mat.quantity.assign(9, 1.0);

    auto zero = excess_differences(mat, {0.0, 0.0, 0.0});
    for (std::size_t k = 0; k < 9; ++k)
        if (!std::isnan(mat.delta[k])) CHECK(zero.excess[k] == mat.delta[k]);
    CHECK(zero.share_within() == 0.0);

    auto huge = excess_differences(mat, {1.0, 1.0, 1.0});
    for (std::size_t k = 0; k < 9; ++k)
        if (!std::isnan(mat.delta[k])) CHECK(huge.excess[k] == 0.0);
    CHECK(huge.share_within() == 1.0);

    auto hand = excess_differences(mat, {0.005, 0.003, 0.001});
    CHECK(hand.excess[1] == 0.0);
    CHECK(hand.excess[3] == doctest::Approx(0.007));
    CHECK(hand.excess[5] == 0.0);
    CHECK(std::isnan(hand.excess[6]));
    CHECK(hand.excess[7] == 0.0);
    CHECK(hand.positive == 4);
    CHECK(hand.positive_within == 3);
    CHECK(hand.within[3] == 0);
    CHECK(hand.within[0] == -1);
    CHECK(hand.share_within() == doctest::Approx(0.75));

    mat.delta.assign(9, 0.0);
    CHECK(std::isnan(excess_differences(mat, {0.0, 0.0, 0.0}).share_within()));
}

TEST_CASE("utility functions") {
    auto c = Utility::crra(2.0, 1.0);
    CHECK(c.value(0.0) == doctest::Approx(-1.0));
    CHECK(c.inverse(c.value(0.3)) == doctest::Approx(0.3));
    CHECK(c.taylor_coefficient(2, 0.0) == doctest::Approx(-1.0));  // -gamma / (2 (w0 + x))
    CHECK(c.taylor_coefficient(4, 0.0) == doctest::Approx(-1.0));  // -24 / 24
    CHECK_FALSE(c.in_domain(-1.0));
    auto log_u = Utility::crra(1.0, 1.0);
    CHECK(log_u.value(std::exp(1.0) - 1.0) == doctest::Approx(1.0));
    auto a = Utility::cara(3.0);
    CHECK(a.taylor_coefficient(2, 0.7) == doctest::Approx(-1.5));
    CHECK(a.taylor_coefficient(3, 0.7) == doctest::Approx(1.5));
    CHECK(a.inverse(a.value(-0.2)) == doctest::Approx(-0.2));
    CHECK(Utility::linear().value(0.25) == 0.25);
    CHECK_THROWS_AS(Utility::crra(0.0).validate(), Error);
}
