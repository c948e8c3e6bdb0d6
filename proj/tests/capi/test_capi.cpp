#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "latarb/latarb.h"

namespace {

struct Captured {
    std::vector<std::string> messages;
};

void capture(latarb_log_level level, const char* message, void* user) {
    if (level >= LATARB_LOG_INFO) static_cast<Captured*>(user)->messages.push_back(message);
}

latarb_book* make_book(std::vector<std::pair<double, double>> bids, std::vector<std::pair<double, double>> asks) {
    latarb_book* b = nullptr;
    REQUIRE(latarb_book_create("x", 0, &b) == LATARB_OK);
    for (auto [p, q] : bids) REQUIRE(latarb_book_add_level(b, 0, p, q) == LATARB_OK);
    for (auto [p, q] : asks) REQUIRE(latarb_book_add_level(b, 1, p, q) == LATARB_OK);
    return b;
}

}  // namespace

TEST_CASE("bounds through the C interface") {
    double d = 0.0;
    REQUIRE(latarb_crra_bound(0.0009, 2.0, 29.4, 1340.72, &d) == LATARB_OK);
    double inner = 4.0 * 29.4 * 29.4 + 2.0 * 2.0 * 3.0 * 4.0 * 1340.72;
    CHECK(d == doctest::Approx(0.5 * 0.0009 * std::sqrt(2.0 * 29.4 + std::sqrt(inner))).epsilon(1e-14));

    latarb_utility u{LATARB_UTILITY_CRRA, 2.0, 0.0};
    double root = 0.0;
    REQUIRE(latarb_ce_root_bound(&u, 0.0009, 0.0, 29.4, 1340.72, NAN, NAN, &root) == LATARB_OK);
    CHECK(root == doctest::Approx(d).epsilon(1e-10));

    REQUIRE(latarb_cara_bound(1.0, 1.0, 1.0, 1.0, &d) == LATARB_OK);
    CHECK(d == doctest::Approx(0.625));

    double g = 0.0;
    REQUIRE(latarb_crra_bound(0.001, 7.0, 12.0, 300.0, &d) == LATARB_OK);
    REQUIRE(latarb_implied_gamma(d, 0.001, 12.0, 300.0, &g) == LATARB_OK);
    CHECK(g == doctest::Approx(7.0).epsilon(1e-8));

    double m1 = 0.0, m2 = 0.0;
    REQUIRE(latarb_total_latency_moments(10.0, 100.0, 9.7, 94.09, 3, &m1, &m2) == LATARB_OK);
    CHECK(m1 == doctest::Approx(29.4));
    CHECK(m2 == doctest::Approx(1340.72));

    latarb_decomposition dec{};
    REQUIRE(latarb_decompose(0.0009, 2.0, 10.0, 100.0, 9.7, 94.09, 1, &dec) == LATARB_OK);
    CHECK(dec.security_share == 0.0);
}

TEST_CASE("errors become status codes with messages") {
    double d = 0.0;
    CHECK(latarb_crra_bound(0.001, 1.0, 1.0, 1.0, &d) == LATARB_INVALID_ARGUMENT);
    CHECK(std::string(latarb_last_error()).find("gamma") != std::string::npos);
    CHECK(latarb_crra_bound(0.001, 2.0, 1.0, 1.0, nullptr) == LATARB_INVALID_ARGUMENT);
    CHECK(latarb_total_latency_moments(1.0, 1.0, 9.7, 94.09, 0, &d, &d) == LATARB_INVALID_ARGUMENT);
    CHECK(std::string(latarb_status_name(LATARB_STALE_ARTIFACT)) == "stale_artifact");
    CHECK(latarb_status_is_validation(LATARB_SCHEMA_MISMATCH));
    CHECK_FALSE(latarb_status_is_validation(LATARB_NO_CONVERGENCE));
    CHECK(std::string(latarb_version()).size() > 0);
}

TEST_CASE("order books and optimal quantity") {
    latarb_book* buy = make_book({{99, 5}}, {{100, 1}, {103, 1}});
    latarb_book* sell = make_book({{102, 2}}, {{104, 2}});
    double price = 0.0;
    REQUIRE(latarb_book_walk(buy, 1, 2.0, 0.0, &price) == LATARB_OK);
    CHECK(price == doctest::Approx(101.5));
    CHECK(latarb_book_walk(buy, 1, 5.0, 0.0, &price) == LATARB_INSUFFICIENT_DEPTH);

    latarb_exchange_profile p{0.0, NAN, 0};
    double q = 0.0, delta = 0.0, ret = 0.0;
    REQUIRE(latarb_optimal_quantity(buy, sell, &p, &p, 200, &q, &delta, &ret) == LATARB_OK);
    CHECK(q == 1.0);
    CHECK(ret == doctest::Approx(2.0));
    CHECK(delta == doctest::Approx(std::log(1.02)));

    CHECK(latarb_book_add_level(buy, 1, 101.0, 1.0) == LATARB_INVALID_ARGUMENT);
    CHECK(latarb_book_add_level(buy, 2, 101.0, 1.0) == LATARB_INVALID_ARGUMENT);
    latarb_book_free(buy);
    latarb_book_free(sell);
    latarb_book_free(nullptr);
}

TEST_CASE("latency models through the C interface") {
    std::mt19937_64 rng(4);
    std::lognormal_distribution<double> fee(std::log(14.0), 1.0), pool(std::log(4500.0), 0.8);
    const std::size_t n = 2000;
    std::vector<double> tau(n), cov(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        cov[2 * i] = fee(rng);
        cov[2 * i + 1] = pool(rng);
        double eta = 1.19 - 0.22 * std::log1p(cov[2 * i]) + 0.31 * std::log(cov[2 * i + 1]);
        tau[i] = std::gamma_distribution<double>(0.62, std::exp(eta))(rng);
    }
    latarb_model *u = nullptr, *r = nullptr;
    REQUIRE(latarb_model_fit_arrays(tau.data(), cov.data(), n, LATARB_MODEL_GAMMA, 1, &u) == LATARB_OK);
    REQUIRE(latarb_model_fit_arrays(tau.data(), cov.data(), n, LATARB_MODEL_GAMMA, 0, &r) == LATARB_OK);
    double mean = 0.0, var = 0.0;
    REQUIRE(latarb_model_predict(u, 14.0, 4500.0, &mean, &var) == LATARB_OK);
    CHECK(mean > 0.0);
    CHECK(var > 0.0);
    latarb_lr_result lr{};
    REQUIRE(latarb_model_lr_test(r, u, &lr) == LATARB_OK);
    CHECK(lr.dof == 2);
    CHECK(lr.p_value < 0.05);
    CHECK(latarb_model_lr_test(u, r, &lr) == LATARB_NOT_NESTED);
    char* js = nullptr;
    REQUIRE(latarb_model_to_json(u, &js) == LATARB_OK);
    CHECK(std::string(js).find("\"theta\"") != std::string::npos);
    latarb_string_free(js);
    latarb_model_free(u);
    latarb_model_free(r);

    latarb_model* few = nullptr;
    CHECK(latarb_model_fit_arrays(tau.data(), nullptr, 10, LATARB_MODEL_GAMMA, 0, &few) == LATARB_INVALID_ARGUMENT);
    CHECK(few == nullptr);

    latarb_model* csv = nullptr;
    std::string path = std::string(LATARB_FIXTURES) + "/synthetic/transactions.csv";
    REQUIRE(latarb_model_fit_csv(path.c_str(), LATARB_MODEL_EXPONENTIAL, 1, &csv) == LATARB_OK);
    latarb_model_free(csv);
    CHECK(latarb_model_fit_csv("/nonexistent.csv", LATARB_MODEL_GAMMA, 1, &csv) == LATARB_IO_ERROR);
}

TEST_CASE("pipeline and log callback") {
    Captured cap;
    latarb_set_log_callback(capture, &cap);
    latarb_set_log_level(LATARB_LOG_INFO);
    auto out = (std::filesystem::temp_directory_path() / "latarb_capi_pipeline").string();
    std::filesystem::remove_all(out);
    std::string config = std::string(LATARB_FIXTURES) + "/synthetic/config.json";
    std::string overrides = "{\"output_dir\": \"" + out + "\"}";
    latarb_pipeline* p = nullptr;
    REQUIRE(latarb_pipeline_create(config.c_str(), overrides.c_str(), &p) == LATARB_OK);
    CHECK(std::string(latarb_pipeline_output_dir(p)) == out);
    CHECK(latarb_pipeline_run(p, "bounds") == LATARB_STALE_ARTIFACT);
    for (const char* step : {"ingest", "vol", "latency", "bounds", "excess", "implied-gamma"})
        CHECK(latarb_pipeline_run(p, step) == LATARB_OK);
    CHECK(latarb_pipeline_run(p, "fit") == LATARB_INVALID_ARGUMENT);
    CHECK(std::filesystem::exists(out + "/excess/share_within.csv"));
    latarb_pipeline_free(p);
    CHECK(latarb_pipeline_create(config.c_str(), "{not json", &p) == LATARB_PARSE_ERROR);
    CHECK(latarb_pipeline_create(config.c_str(), "{\"to\": \"2018-01-01\"}", &p) == LATARB_INVALID_ARGUMENT);
    latarb_set_log_callback(nullptr, nullptr);
    CHECK_FALSE(cap.messages.empty());

    char* report = nullptr;
    const char* settings = R"({"paths": 20000, "laplace": {"sigma": 0.001, "lambda": 0.1, "delta": 0},
        "negative_control": {"shape": 0.6}, "indifference": {"gamma": 2, "sigma": 0.0009, "shape": 0.62, "rate": 0.05}})";
    REQUIRE(latarb_simulate_report(settings, 3, 1, &report) == LATARB_OK);
    CHECK(std::string(report).find("all_pass") != std::string::npos);
    latarb_string_free(report);
}
