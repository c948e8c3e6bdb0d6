#include "latarb/latarb.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <string>

#include <json.hpp>

#include "latarb/bounds/arb_bounds.hpp"
#include "latarb/common/error.hpp"
#include "latarb/common/log.hpp"
#include "latarb/latency/model_json.hpp"
#include "latarb/latency/tx_io.hpp"
#include "latarb/marketdata/arbitrage.hpp"
#include "latarb/pipeline/pipeline.hpp"

struct latarb_book {
    latarb::marketdata::OrderbookSnapshot snapshot;
};

struct latarb_model {
    latarb::latency::LatencyModel model;
};

struct latarb_pipeline {
    latarb::pipeline::Pipeline pipeline;
};

namespace {

thread_local std::string g_last_error;

latarb_status to_status(latarb::ErrorCode code) { return static_cast<latarb_status>(static_cast<int>(code)); }

latarb_status set_error(latarb_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
latarb_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        fn();
        return LATARB_OK;
    } catch (const latarb::Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return set_error(LATARB_PARSE_ERROR, e.what());
    } catch (const std::bad_alloc&) {
        return set_error(LATARB_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(LATARB_INTERNAL, e.what());
    } catch (...) {
        return set_error(LATARB_INTERNAL, "unknown error");
    }
}

void require(bool condition, const char* message) {
    if (!condition) latarb::fail(latarb::ErrorCode::invalid_argument, message);
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

latarb::bounds::Utility to_utility(const latarb_utility& u) {
    switch (u.kind) {
        case LATARB_UTILITY_LINEAR: return latarb::bounds::Utility::linear();
        case LATARB_UTILITY_CRRA: return latarb::bounds::Utility::crra(u.gamma, u.wealth_offset);
        case LATARB_UTILITY_CARA: return latarb::bounds::Utility::cara(u.gamma);
    }
    latarb::fail(latarb::ErrorCode::invalid_argument, "unknown utility kind");
}

latarb::marketdata::ExchangeProfile to_profile(const latarb_exchange_profile& p) {
    latarb::marketdata::ExchangeProfile out;
    out.taker_fee = p.taker_fee;
    if (!std::isnan(p.withdrawal_fee)) out.withdrawal_fee = p.withdrawal_fee;
    if (p.confirmations > 0) out.confirmations = p.confirmations;
    out.validate();
    return out;
}

latarb::latency::ModelKind to_kind(latarb_model_kind k) {
    require(k == LATARB_MODEL_EXPONENTIAL || k == LATARB_MODEL_GAMMA, "unknown model kind");
    return k == LATARB_MODEL_GAMMA ? latarb::latency::ModelKind::gamma : latarb::latency::ModelKind::exponential;
}

latarb_status fit_model(const latarb::latency::DurationData& data, latarb_model_kind kind, int with_covariates,
                        latarb_model** out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        *out = nullptr;
        auto model = latarb::latency::fit(data, to_kind(kind), with_covariates != 0);
        *out = new latarb_model{std::move(model)};
    });
}

}  // namespace

extern "C" {

const char* latarb_last_error(void) { return g_last_error.c_str(); }

const char* latarb_version(void) { return "0.1.0"; }

const char* latarb_status_name(latarb_status status) {
    if (status == LATARB_CHECK_FAILED) return "check_failed";
    if (status < LATARB_OK || status > LATARB_INTERNAL) return "unknown";
    return latarb::error_code_name(static_cast<latarb::ErrorCode>(status));
}

int latarb_status_is_validation(latarb_status status) {
    if (status <= LATARB_OK || status > LATARB_INTERNAL) return 0;
    return latarb::is_validation_error(static_cast<latarb::ErrorCode>(status)) ? 1 : 0;
}

void latarb_set_log_callback(latarb_log_fn fn, void* user) {
    if (!fn) {
        latarb::log::set_sink(nullptr);
        return;
    }
    latarb::log::set_sink([fn, user](latarb::log::Level level, const std::string& message) {
        fn(static_cast<latarb_log_level>(static_cast<int>(level)), message.c_str(), user);
    });
}

void latarb_set_log_level(latarb_log_level level) {
    latarb::log::set_min_level(static_cast<latarb::log::Level>(static_cast<int>(level)));
}

void latarb_string_free(char* s) { std::free(s); }

latarb_status latarb_crra_bound(double sigma, double gamma, double m1, double m2, double* out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        *out = latarb::bounds::crra_bound(sigma, gamma, m1, m2);
    });
}

latarb_status latarb_cara_bound(double sigma, double gamma, double m1, double m2, double* out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        *out = latarb::bounds::cara_bound(sigma, gamma, m1, m2);
    });
}

latarb_status latarb_ce_root_bound(const latarb_utility* utility, double sigma, double drift, double m1, double m2, double m3,
                                   double m4, double* out) {
    return guarded([&] {
        require(utility != nullptr && out != nullptr, "utility and out must not be NULL");
        *out = latarb::bounds::ce_root_bound(to_utility(*utility), sigma, drift, {m1, m2, m3, m4});
    });
}

latarb_status latarb_implied_gamma(double delta, double sigma, double m1, double m2, double* out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        *out = latarb::bounds::implied_gamma(delta, sigma, m1, m2);
    });
}

latarb_status latarb_total_latency_moments(double e_tau, double v_tau, double block_mean, double block_variance,
                                           int confirmations, double* m1, double* m2) {
    return guarded([&] {
        require(m1 != nullptr && m2 != nullptr, "m1 and m2 must not be NULL");
        auto t = latarb::latency::total_latency_moments(e_tau, v_tau, {block_mean, block_variance}, confirmations);
        *m1 = t.m1;
        *m2 = t.m2;
    });
}

latarb_status latarb_decompose(double sigma, double gamma, double e_tau, double v_tau, double block_mean, double block_variance,
                               int confirmations, latarb_decomposition* out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        auto d = latarb::bounds::decompose(sigma, gamma, e_tau, v_tau, {block_mean, block_variance}, confirmations);
        *out = {d.bound, d.security_share, d.uncertainty_share};
    });
}

latarb_status latarb_book_create(const char* exchange, int64_t timestamp, latarb_book** out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        *out = new latarb_book{{exchange ? exchange : "", timestamp, {}, {}}};
    });
}

latarb_status latarb_book_add_level(latarb_book* book, int side, double price, double quantity) {
    return guarded([&] {
        require(book != nullptr, "book must not be NULL");
        require(side == 0 || side == 1, "side must be 0 (bid) or 1 (ask)");
        require(std::isfinite(price) && price > 0.0 && std::isfinite(quantity) && quantity > 0.0,
                "price and quantity must be positive");
        auto& levels = side == 0 ? book->snapshot.bids : book->snapshot.asks;
        if (!levels.empty()) {
            bool ordered = side == 0 ? price < levels.back().price : price > levels.back().price;
            require(ordered, "levels must be added best first with strictly worsening prices");
        }
        levels.push_back({price, quantity});
    });
}

latarb_status latarb_book_walk(const latarb_book* book, int side, double quantity, double taker_fee, double* price) {
    return guarded([&] {
        require(book != nullptr && price != nullptr, "book and price must not be NULL");
        require(side == 0 || side == 1, "side must be 0 (bid) or 1 (ask)");
        auto s = side == 0 ? latarb::marketdata::Side::bid : latarb::marketdata::Side::ask;
        *price = latarb::marketdata::walk_book(s, side == 0 ? book->snapshot.bids : book->snapshot.asks, quantity, taker_fee);
    });
}

latarb_status latarb_optimal_quantity(const latarb_book* buy_book, const latarb_book* sell_book, const latarb_exchange_profile* buy,
                                      const latarb_exchange_profile* sell, size_t grid_points, double* quantity, double* delta,
                                      double* total_return) {
    return guarded([&] {
        require(buy_book && sell_book && buy && sell, "books and profiles must not be NULL");
        require(quantity && delta && total_return, "outputs must not be NULL");
        latarb::marketdata::QuantityGridOptions opt;
        if (grid_points > 0) opt.points = grid_points;
        buy_book->snapshot.validate();
        sell_book->snapshot.validate();
        auto r = latarb::marketdata::optimal_quantity(buy_book->snapshot, sell_book->snapshot, to_profile(*buy),
                                                      to_profile(*sell), opt);
        *quantity = r.quantity;
        *delta = r.delta;
        *total_return = r.total_return;
    });
}

void latarb_book_free(latarb_book* book) { delete book; }

latarb_status latarb_model_fit_arrays(const double* tau, const double* covariates, size_t n, latarb_model_kind kind,
                                      int with_covariates, latarb_model** out) {
    latarb::latency::DurationData data;
    latarb_status st = guarded([&] {
        require(tau != nullptr || n == 0, "tau must not be NULL");
        require(covariates != nullptr || !with_covariates, "covariates are required when with_covariates is set");
        data.tau.assign(tau, tau + n);
        if (covariates) {
            data.schema = latarb::latency::default_covariates();
            data.covariates.assign(2, std::vector<double>(n));
            for (size_t i = 0; i < n; ++i) {
                data.covariates[0][i] = covariates[2 * i];
                data.covariates[1][i] = covariates[2 * i + 1];
            }
        }
    });
    if (st != LATARB_OK) return st;
    return fit_model(data, kind, with_covariates, out);
}

latarb_status latarb_model_fit_csv(const char* path, latarb_model_kind kind, int with_covariates, latarb_model** out) {
    latarb::latency::DurationData data;
    latarb_status st = guarded([&] {
        require(path != nullptr, "path must not be NULL");
        data = latarb::latency::to_duration_data(latarb::latency::read_transactions(path, false));
    });
    if (st != LATARB_OK) return st;
    return fit_model(data, kind, with_covariates, out);
}

latarb_status latarb_model_predict(const latarb_model* model, double fee_per_byte, double mempool_size, double* mean,
                                   double* variance) {
    return guarded([&] {
        require(model && mean && variance, "model and outputs must not be NULL");
        std::vector<double> x;
        for (const auto& s : model->model.schema) x.push_back(s.name == "fee_per_byte" ? fee_per_byte : mempool_size);
        auto m = latarb::latency::predict_moments(model->model, x);
        *mean = m.mean;
        *variance = m.variance;
    });
}

latarb_status latarb_model_to_json(const latarb_model* model, char** out) {
    return guarded([&] {
        require(model && out, "model and out must not be NULL");
        *out = copy_string(latarb::latency::model_to_json(model->model).dump(2));
    });
}

latarb_status latarb_model_lr_test(const latarb_model* restricted, const latarb_model* unrestricted, latarb_lr_result* out) {
    return guarded([&] {
        require(restricted && unrestricted && out, "models and out must not be NULL");
        auto t = latarb::latency::lr_test(restricted->model, unrestricted->model);
        *out = {t.statistic, t.dof, t.p_value};
    });
}

void latarb_model_free(latarb_model* model) { delete model; }

latarb_status latarb_simulate_report(const char* settings_json, uint64_t seed, unsigned threads, char** out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        auto settings = settings_json ? nlohmann::json::parse(settings_json) : nlohmann::json::object();
        *out = copy_string(latarb::pipeline::simulate_report(settings, seed, threads == 0 ? 1 : threads).dump(2));
    });
}

latarb_status latarb_pipeline_create(const char* config_path, const char* overrides_json, latarb_pipeline** out) {
    return guarded([&] {
        require(config_path && out, "config_path and out must not be NULL");
        *out = nullptr;
        auto overrides = overrides_json ? nlohmann::json::parse(overrides_json) : nlohmann::json::object();
        *out = new latarb_pipeline{latarb::pipeline::Pipeline(latarb::pipeline::load_config(config_path, overrides))};
    });
}

latarb_status latarb_pipeline_run(latarb_pipeline* pipeline, const char* step) {
    bool ok = true;
    latarb_status st = guarded([&] {
        require(pipeline && step, "pipeline and step must not be NULL");
        ok = pipeline->pipeline.run(latarb::pipeline::parse_step(step));
    });
    if (st == LATARB_OK && !ok) return set_error(LATARB_CHECK_FAILED, "oracle checks failed");
    return st;
}

const char* latarb_pipeline_output_dir(const latarb_pipeline* pipeline) {
    return pipeline ? pipeline->pipeline.config().output_dir.c_str() : "";
}

void latarb_pipeline_free(latarb_pipeline* pipeline) { delete pipeline; }

}  // extern "C"
