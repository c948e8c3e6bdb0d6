#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "latarb/common/error.hpp"
#include "latarb/marketdata/arbitrage.hpp"
#include "latarb/marketdata/book_io.hpp"
#include "latarb/marketdata/orderbook.hpp"
#include "support/oracles.hpp"

using namespace latarb;
using namespace latarb::marketdata;

namespace {

OrderbookSnapshot book(std::vector<Level> bids, std::vector<Level> asks, std::string ex = "x") {
    return {std::move(ex), 0, std::move(bids), std::move(asks)};
}

ExchangeProfile profile(double fee, std::optional<double> withdrawal = std::nullopt) {
    ExchangeProfile p;
    p.exchange = "x";
    p.taker_fee = fee;
    p.withdrawal_fee = withdrawal;
    return p;
}

std::vector<Level> to_levels(const oracle::Ladder& l) {
    std::vector<Level> out;
    for (const auto& [p, q] : l) out.push_back({p, q});
    return out;
}

std::string temp_file(const std::string& name, const std::string& content) {
    auto p = std::filesystem::temp_directory_path() / ("latarb_md_" + name);
    std::ofstream(p) << content;
    return p.string();
}

}  // namespace

TEST_CASE("walk_book examples") {
    CHECK(walk_book(Side::ask, {{100, 5}}, 2, 0.0) == 100.0);
    CHECK(walk_book(Side::ask, {{100, 1}, {110, 1}}, 2, 0.0) == doctest::Approx(105.0));
    CHECK(walk_book(Side::ask, {{100, 1}}, 1, 0.001) == doctest::Approx(100.1));
    CHECK(walk_book(Side::bid, {{100, 1}}, 1, 0.001) == doctest::Approx(99.9));
    CHECK_THROWS_AS(walk_book(Side::ask, {{100, 1}}, 1.5, 0.0), Error);
    CHECK_THROWS_AS(walk_book(Side::ask, {{100, 1}}, 0.0, 0.0), Error);
    try {
        walk_book(Side::bid, {{100, 1}}, 2, 0.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::insufficient_depth);
    }
}

TEST_CASE("walk_book agrees with level-by-level execution and is monotone") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        auto b = oracle::random_book(rng, 1000.0, 1 + rep % 5);
        Ladder asks(Side::ask, to_levels(b.asks)), bids(Side::bid, to_levels(b.bids));
        double prev_ask = 0.0, prev_bid = 1e300;
        for (int k = 1; k <= 20; ++k) {
            double qa = asks.depth() * k / 20.0, qb = bids.depth() * k / 20.0;
            double pa = walk_book(asks, qa, 0.002), pb = walk_book(bids, qb, 0.002);
            CHECK(pa == doctest::Approx(oracle::average_price(b.asks, qa, 0.002, true)).epsilon(1e-12));
            CHECK(pb == doctest::Approx(oracle::average_price(b.bids, qb, 0.002, false)).epsilon(1e-12));
            CHECK(pa >= prev_ask * (1 - 1e-14));
            CHECK(pb <= prev_bid * (1 + 1e-14));
            prev_ask = pa;
            prev_bid = pb;
        }
    }
}

TEST_CASE("price_difference examples") {
    auto buy = book({{99, 1}}, {{100, 1}});
    auto sell = book({{102, 1}}, {{103, 1}});
    CHECK(price_difference(buy, sell, profile(0), profile(0), 0.5).delta == doctest::Approx(std::log(102.0 / 100.0)));
    double fee = price_difference(buy, sell, profile(0.002), profile(0.002), 0.5).delta;
    CHECK(fee == doctest::Approx(std::log(102 * 0.998) - std::log(100 * 1.002)));
    CHECK(fee == doctest::Approx(0.0158).epsilon(0.01));

    auto same = book({{99, 1}}, {{100, 1}});
    CHECK(price_difference(same, same, profile(0), profile(0), 1.0).delta < 0.0);

    auto r = price_difference(buy, sell, profile(0, 0.6), profile(0), 0.5);
    CHECK(r.no_trade);
    CHECK(r.delta == 0.0);
}

TEST_CASE("price_difference is sign-antisymmetric at best quotes") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        auto a = oracle::random_book(rng, 1000.0, 3);
        auto b = oracle::random_book(rng, 1000.0 * (1.0 + 0.01 * (static_cast<double>(rep % 7) - 3.0)), 3);
        auto ba = book(to_levels(a.bids), to_levels(a.asks)), bb = book(to_levels(b.bids), to_levels(b.asks));
        double q = std::min({a.bids[0].second, a.asks[0].second, b.bids[0].second, b.asks[0].second});
        double ab = price_difference(ba, bb, profile(0), profile(0), q).delta;
        double back = price_difference(bb, ba, profile(0), profile(0), q).delta;
        if (ab > 0) CHECK(back < 0);
        if (back > 0) CHECK(ab < 0);
    }
}

TEST_CASE("optimal_quantity examples") {
    // level 2 of the buy book loses money
    auto buy = book({{99, 5}}, {{100, 1}, {103, 1}});
    auto sell = book({{102, 2}}, {{104, 2}});
    auto r = optimal_quantity(buy, sell, profile(0), profile(0));
    CHECK(r.quantity == 1.0);
    CHECK(r.total_return == doctest::Approx(2.0));

    // sell bids everywhere above buy asks: take all available depth
    auto rich = book({{120, 2}, {119, 3}}, {{121, 1}});
    auto cheap = book({{90, 1}}, {{100, 1}, {101, 1}, {102, 0.5}});
    auto all = optimal_quantity(cheap, rich, profile(0), profile(0));
    CHECK(all.quantity == doctest::Approx(2.5));

    // unprofitable after fees
    auto none = optimal_quantity(buy, sell, profile(0.02), profile(0.02));
    CHECK(none.quantity == 0.0);
    CHECK(none.total_return == 0.0);
    CHECK(none.delta == 0.0);

    // quantity not above the withdrawal fee
    auto wd = optimal_quantity(buy, sell, profile(0, 1.0), profile(0));
    CHECK(wd.quantity == 0.0);
}

TEST_CASE("optimal_quantity equals the exhaustive and continuous oracles") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int trades = 0;
    for (int rep = 0; rep < 300; ++rep) {
        auto a = oracle::random_book(rng, 1000.0, 1 + rep % 5);
        auto b = oracle::random_book(rng, 1000.0 * (1.0 + 0.01 * u(rng)), 1 + (rep / 5) % 5);
        oracle::Books ob{a.asks, b.bids, 0.002 * u(rng), 0.002 * u(rng), rep % 3 == 0 ? 0.1 * u(rng) : 0.0};
        auto r = optimal_quantity(book(to_levels(a.bids), to_levels(a.asks)), book(to_levels(b.bids), to_levels(b.asks)),
                                  profile(ob.buy_fee, ob.withdrawal), profile(ob.sell_fee));
        auto g = oracle::grid_search(ob, 200);
        auto c = oracle::continuous_search(ob);
        CHECK(r.quantity == g.quantity);
        CHECK(r.total_return == doctest::Approx(g.total_return).epsilon(1e-12));
        CHECK(r.total_return == doctest::Approx(c.total_return).epsilon(1e-12));
        if (r.quantity > 0) ++trades;
    }
    CHECK(trades > 50);
}

TEST_CASE("withdrawal fee deduction is opt-in") {
    auto buy = book({{99, 5}}, {{100, 3}});
    auto sell = book({{105, 3}}, {{106, 2}});
    auto keep = optimal_quantity(buy, sell, profile(0, 0.5), profile(0));
    auto deduct = optimal_quantity(buy, sell, profile(0, 0.5), profile(0), {200, true});
    CHECK(keep.total_return == doctest::Approx(15.0));
    // deducting 0.5 units: sell 2.5 for 262.5, buy 3 for 300
    CHECK(deduct.quantity == 0.0);
}

TEST_CASE("taker fees lower q* and total return") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        auto a = oracle::random_book(rng, 1000.0, 5);
        auto b = oracle::random_book(rng, 1000.0 * (1.0 + 0.01 * u(rng)), 5);
        auto ba = book(to_levels(a.bids), to_levels(a.asks)), bb = book(to_levels(b.bids), to_levels(b.asks));
        double prev_q = 1e300, prev_ret = 1e300;
        for (double f : {0.0, 0.0005, 0.001, 0.002, 0.004, 0.008}) {
            auto r = optimal_quantity(ba, bb, profile(f), profile(0.001));
            CHECK(r.total_return <= prev_ret * (1 + 1e-12));
            // q* may only shrink as the buy fee rises (up to grid coarseness between breakpoints)
            CHECK(r.quantity <= prev_q * (1 + 1e-12));
            prev_q = r.quantity;
            prev_ret = r.total_return;
        }
    }
}

TEST_CASE("a higher taker fee can raise the per-unit difference when q* shrinks") {
    // Documented counterexample to entry-wise monotonicity of the difference matrix in fees.
    auto buy = book({{99, 1}}, {{100, 1}, {101, 10}});
    auto sell = book({{110, 1}, {101.5, 10}}, {{111, 1}});
    auto low = optimal_quantity(buy, sell, profile(0.0), profile(0.0));
    auto high = optimal_quantity(buy, sell, profile(0.005), profile(0.0));
    CHECK(low.quantity == doctest::Approx(11.0));
    CHECK(high.quantity == doctest::Approx(1.0));
    CHECK(high.total_return < low.total_return);
    CHECK(high.delta > low.delta);
}

TEST_CASE("optimal_quantity_fee examples") {
    auto buy = book({{99, 5}}, {{100, 1}, {103, 1}});
    auto sell = book({{102, 2}}, {{104, 2}});
    auto zero = optimal_quantity_fee(buy, sell, profile(0), profile(0), [](double) { return 0.0; });
    auto plain = optimal_quantity(buy, sell, profile(0), profile(0));
    CHECK(zero.fee == 0.0);
    CHECK(zero.quantity == plain.quantity);
    CHECK(zero.total_return == doctest::Approx(plain.total_return));

    auto flat = optimal_quantity_fee(buy, sell, profile(0), profile(0), [](double) { return 0.005; });
    CHECK(flat.fee == 0.0);
    CHECK(flat.quantity > 0.0);
    CHECK_FALSE(flat.choice2);

    auto infeasible = optimal_quantity_fee(buy, sell, profile(0), profile(0), [](double) { return 1.0; });
    CHECK(infeasible.quantity == 0.0);
    CHECK(infeasible.fee == 0.0);
    CHECK(infeasible.total_return == 0.0);
    CHECK(infeasible.status == BindingStatus::no_trade);
}

TEST_CASE("a steep bound curve buys a positive settlement fee matching the 2-D oracle") {
    auto buy = book({{99, 5}}, {{100, 20}});
    auto sell = book({{101, 20}}, {{102, 5}});
    auto bound = [](double f) { return 0.012 * std::exp(-f / 0.001); };
    FeeGridOptions fo;
    auto r = optimal_quantity_fee(buy, sell, profile(0), profile(0), bound, fo);
    oracle::Books ob{{{100, 20}}, {{101, 20}}, 0, 0, 0};
    auto o = oracle::grid_search_fee(ob, bound, 200, fo.points, fo.min_fee, fo.max_fee);
    CHECK(r.fee > 0.0);
    CHECK(r.fee == o.fee);
    CHECK(r.quantity == o.quantity);
    CHECK(r.total_return == doctest::Approx(o.total_return).epsilon(1e-12));
    CHECK(r.delta >= r.bound);
}

TEST_CASE("difference_matrix assembly") {
    std::vector<std::string> names{"a", "b", "c"};
    std::vector<ExchangeProfile> profs(3, profile(0));
    auto flat = book({{99, 1}}, {{100, 1}});
    auto m = difference_matrix(0, names, {flat, flat, flat}, profs);
    for (double v : m.delta) CHECK(v == 0.0);

    auto premium = book({{105, 1}}, {{106, 1}});
    auto two = difference_matrix(0, {"a", "b"}, {flat, premium}, {profile(0), profile(0)});
    CHECK(two.at(1, 0) == doctest::Approx(std::log(105.0 / 100.0)));
    CHECK(two.at(0, 1) == 0.0);
    CHECK(two.quantity_at(1, 0) == 1.0);

    // hand computation: a asks 100, b bids 105 / asks 106, c bids 103 / asks 104
    auto c = book({{103, 1}}, {{104, 1}});
    auto hand = difference_matrix(0, names, {flat, premium, c}, profs);
    CHECK(hand.at(1, 0) == doctest::Approx(std::log(1.05)));
    CHECK(hand.at(2, 0) == doctest::Approx(std::log(1.03)));
    CHECK(hand.at(1, 2) == doctest::Approx(std::log(105.0 / 104.0)));
    CHECK(hand.at(0, 1) == 0.0);
    CHECK(hand.at(0, 2) == 0.0);
    CHECK(hand.at(2, 1) == 0.0);

    auto missing = difference_matrix(0, names, {flat, std::nullopt, c}, profs);
    CHECK(std::isnan(missing.at(1, 0)));
    CHECK(std::isnan(missing.at(0, 1)));
    CHECK(missing.at(1, 1) == 0.0);
    CHECK(missing.at(2, 0) == doctest::Approx(std::log(1.03)));

    CHECK_THROWS_AS(difference_matrix(0, names, {flat, std::nullopt, std::nullopt}, profs), Error);
}

TEST_CASE("snapshot and profile validation") {
    CHECK_NOTHROW(book({{99, 1}}, {{100, 1}}).validate());
    CHECK_THROWS_AS(book({{101, 1}}, {{100, 1}}).validate(), Error);
    CHECK_THROWS_AS(book({{99, 1}, {99.5, 1}}, {{100, 1}}).validate(), Error);
    CHECK_THROWS_AS(book({{99, 0}}, {{100, 1}}).validate(), Error);
    CHECK_THROWS_AS(book({}, {{100, 1}}).validate(), Error);
    auto p = profile(0.001);
    CHECK(p.confirmations_or_default() == 3);
    CHECK(p.withdrawal_fee_or_default() == 0.0);
    p.confirmations = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = profile(-0.1);
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("order book files parse identically from csv and jsonl") {
    std::string csv_text =
        "exchange,timestamp,side,level,price,quantity\n"
        "a,2019-01-02T00:00:10Z,bid,1,99,1\n"
        "a,2019-01-02T00:00:10Z,ask,1,100,2\n"
        "a,2019-01-02T00:00:10Z,bid,2,98.5,3\n"
        "b,2019-01-02T00:00:20Z,bid,1,101,1\n"
        "b,2019-01-02T00:00:20Z,ask,1,100.5,1\n";  // crossed
    std::string jsonl_text =
        "{\"exchange\":\"a\",\"timestamp\":\"2019-01-02T00:00:10Z\",\"bids\":[[99,1],[98.5,3]],\"asks\":[[100,2]]}\n"
        "{\"exchange\":\"b\",\"timestamp\":\"2019-01-02T00:00:20Z\",\"bids\":[[101,1]],\"asks\":[[100.5,1]]}\n";
    auto c = temp_file("books.csv", csv_text);
    auto j = temp_file("books.jsonl", jsonl_text);
    IngestReport rc, rj;
    auto bc = read_orderbooks(c, false, &rc);
    auto bj = read_orderbooks(j, false, &rj);
    REQUIRE(bc.size() == 1);
    REQUIRE(bj.size() == 1);
    CHECK(rc.dropped_snapshots == 1);
    CHECK(bc[0].bids.size() == 2);
    CHECK(bc[0].bids[1].price == bj[0].bids[1].price);
    CHECK(bc[0].asks[0].quantity == bj[0].asks[0].quantity);
    CHECK_THROWS_AS(read_orderbooks(c, true), Error);

    auto gap = temp_file("gap.csv", "exchange,timestamp,side,level,price,quantity\na,2019-01-02T00:00:10Z,bid,2,99,1\n"
                                    "a,2019-01-02T00:00:10Z,ask,1,100,1\n");
    CHECK(read_orderbooks(gap, false).empty());
    auto header = temp_file("header.csv", "exchange,time,side,level,price,quantity\n");
    CHECK_THROWS_AS(read_orderbooks(header, false), Error);
}

TEST_CASE("profiles parse with defaults and reject duplicates") {
    auto p = temp_file("profiles.json",
                       R"({"exchanges":[{"exchange":"a","taker_fee":0.001,"withdrawal_fee":null,"confirmations":null,"margin":true,"business":false},
                                         {"exchange":"b","taker_fee":0.002,"withdrawal_fee":0.0005,"confirmations":6,"margin":false,"business":true}]})");
    auto profs = read_profiles(p);
    REQUIRE(profs.size() == 2);
    CHECK(profs[0].confirmations_or_default() == 3);
    CHECK(profs[1].confirmations_or_default() == 6);
    CHECK(profs[1].withdrawal_fee_or_default() == 0.0005);
    CHECK(profs[0].margin);
    auto dup = temp_file("dup.json", R"({"exchanges":[{"exchange":"a","taker_fee":0.001},{"exchange":"a","taker_fee":0.002}]})");
    CHECK_THROWS_AS(read_profiles(dup), Error);
}

TEST_CASE("snapshots align to the minute they close and keep the latest") {
    auto s = [](std::string ex, Timestamp ts, double bid) { return OrderbookSnapshot{std::move(ex), ts, {{bid, 1}}, {{bid + 1, 1}}}; };
    auto m = align_to_minutes({s("a", 60, 1), s("a", 61, 2), s("a", 100, 3), s("b", 120, 4), s("a", 181, 5)});
    REQUIRE(m.size() == 3);
    CHECK(m.at(1).at("a").bids[0].price == 1);
    CHECK(m.at(2).at("a").bids[0].price == 3);
    CHECK(m.at(2).at("b").bids[0].price == 4);
    CHECK(m.at(4).at("a").bids[0].price == 5);
    CHECK(m.count(3) == 0);
}
