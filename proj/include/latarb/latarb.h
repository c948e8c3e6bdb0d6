#ifndef LATARB_LATARB_H
#define LATARB_LATARB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LATARB_BUILDING_LIBRARY)
#    define LATARB_API __declspec(dllexport)
#  else
#    define LATARB_API __declspec(dllimport)
#  endif
#else
#  define LATARB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum latarb_status {
    LATARB_OK = 0,
    LATARB_INVALID_ARGUMENT = 1,
    LATARB_PARSE_ERROR = 2,
    LATARB_IO_ERROR = 3,
    LATARB_INSUFFICIENT_DEPTH = 4,
    LATARB_INSUFFICIENT_HISTORY = 5,
    LATARB_NO_CONVERGENCE = 6,
    LATARB_DOMAIN_ERROR = 7,
    LATARB_SCHEMA_MISMATCH = 8,
    LATARB_NOT_NESTED = 9,
    LATARB_STALE_ARTIFACT = 10,
    LATARB_INTERNAL = 11,
    /* Pipeline step ran but its oracle checks failed. */
    LATARB_CHECK_FAILED = 12
} latarb_status;

typedef enum latarb_utility_kind {
    LATARB_UTILITY_LINEAR = 0,
    LATARB_UTILITY_CRRA = 1,
    LATARB_UTILITY_CARA = 2
} latarb_utility_kind;

typedef struct latarb_utility {
    latarb_utility_kind kind;
    double gamma;
    double wealth_offset; /* CRRA only */
} latarb_utility;

typedef enum latarb_model_kind { LATARB_MODEL_EXPONENTIAL = 0, LATARB_MODEL_GAMMA = 1 } latarb_model_kind;

typedef enum latarb_log_level {
    LATARB_LOG_DEBUG = 0,
    LATARB_LOG_INFO = 1,
    LATARB_LOG_WARN = 2,
    LATARB_LOG_ERROR = 3
} latarb_log_level;

typedef void (*latarb_log_fn)(latarb_log_level level, const char* message, void* user);

typedef struct latarb_book latarb_book;
typedef struct latarb_model latarb_model;
typedef struct latarb_pipeline latarb_pipeline;

typedef struct latarb_exchange_profile {
    double taker_fee;
    double withdrawal_fee; /* asset units; NaN means unknown (treated as 0) */
    int confirmations;     /* <= 0 means unknown (treated as 3) */
} latarb_exchange_profile;

typedef struct latarb_lr_result {
    double statistic;
    int dof;
    double p_value;
} latarb_lr_result;

typedef struct latarb_decomposition {
    double bound;
    double security_share;
    double uncertainty_share;
} latarb_decomposition;

/* Message of the last failure on the calling thread; never NULL. */
LATARB_API const char* latarb_last_error(void);
LATARB_API const char* latarb_version(void);
LATARB_API const char* latarb_status_name(latarb_status status);
/* Non-zero for input, schema and staleness errors (CLI exit code 1). */
LATARB_API int latarb_status_is_validation(latarb_status status);
/* NULL restores the default stderr sink. */
LATARB_API void latarb_set_log_callback(latarb_log_fn fn, void* user);
LATARB_API void latarb_set_log_level(latarb_log_level level);

/* Strings returned through char** out-parameters must be released with this. */
LATARB_API void latarb_string_free(char* s);

/* Bounds. m1, m2 are the first two raw moments of latency in minutes. */
LATARB_API latarb_status latarb_crra_bound(double sigma, double gamma, double m1, double m2, double* out);
LATARB_API latarb_status latarb_cara_bound(double sigma, double gamma, double m1, double m2, double* out);
/* m3, m4 may be NaN when drift is 0. */
LATARB_API latarb_status latarb_ce_root_bound(const latarb_utility* utility, double sigma, double drift, double m1, double m2,
                                              double m3, double m4, double* out);
LATARB_API latarb_status latarb_implied_gamma(double delta, double sigma, double m1, double m2, double* out);
LATARB_API latarb_status latarb_total_latency_moments(double e_tau, double v_tau, double block_mean, double block_variance,
                                                      int confirmations, double* m1, double* m2);
LATARB_API latarb_status latarb_decompose(double sigma, double gamma, double e_tau, double v_tau, double block_mean,
                                          double block_variance, int confirmations, latarb_decomposition* out);

/* Order books. side: 0 bid, 1 ask. Levels must be added best first. */
LATARB_API latarb_status latarb_book_create(const char* exchange, int64_t timestamp, latarb_book** out);
LATARB_API latarb_status latarb_book_add_level(latarb_book* book, int side, double price, double quantity);
LATARB_API latarb_status latarb_book_walk(const latarb_book* book, int side, double quantity, double taker_fee, double* price);
LATARB_API latarb_status latarb_optimal_quantity(const latarb_book* buy_book, const latarb_book* sell_book,
                                                 const latarb_exchange_profile* buy, const latarb_exchange_profile* sell,
                                                 size_t grid_points, double* quantity, double* delta, double* total_return);
LATARB_API void latarb_book_free(latarb_book* book);

/* Latency models. covariates is row-major n x 2 (fee_per_byte, mempool_size) or NULL. */
LATARB_API latarb_status latarb_model_fit_arrays(const double* tau, const double* covariates, size_t n, latarb_model_kind kind,
                                                 int with_covariates, latarb_model** out);
/* CSV with columns tx_id, announce_time, inclusion_time, fee_per_byte, size, mempool_size. */
LATARB_API latarb_status latarb_model_fit_csv(const char* path, latarb_model_kind kind, int with_covariates,
                                              latarb_model** out);
LATARB_API latarb_status latarb_model_predict(const latarb_model* model, double fee_per_byte, double mempool_size,
                                              double* mean, double* variance);
LATARB_API latarb_status latarb_model_to_json(const latarb_model* model, char** out);
LATARB_API latarb_status latarb_model_lr_test(const latarb_model* restricted, const latarb_model* unrestricted,
                                              latarb_lr_result* out);
LATARB_API void latarb_model_free(latarb_model* model);

/* Runs the simulation oracles; settings is the JSON "simulate" section. */
LATARB_API latarb_status latarb_simulate_report(const char* settings_json, uint64_t seed, unsigned threads, char** out);

/* overrides_json is a JSON merge patch applied to the config (may be NULL). */
LATARB_API latarb_status latarb_pipeline_create(const char* config_path, const char* overrides_json, latarb_pipeline** out);
/* step: ingest, vol, latency, bounds, excess, implied-gamma, simulate. */
LATARB_API latarb_status latarb_pipeline_run(latarb_pipeline* pipeline, const char* step);
LATARB_API const char* latarb_pipeline_output_dir(const latarb_pipeline* pipeline);
LATARB_API void latarb_pipeline_free(latarb_pipeline* pipeline);

#ifdef __cplusplus
}
#endif

#endif
