#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "latarb/common/time.hpp"

namespace latarb::latency {

enum class ModelKind { exponential, gamma };
enum class CovariateTransform { identity, log1p, log };

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
const char* transform_name(CovariateTransform t);
CovariateTransform parse_transform(const std::string& name);
double apply_transform(CovariateTransform t, double raw);

struct CovariateSpec {
    std::string name;
    CovariateTransform transform = CovariateTransform::identity;
};

// Default schema: fee per byte enters as log(1 + fee), mempool size in logs.
std::vector<CovariateSpec> default_covariates();

// Raw (untransformed) observations: tau in minutes, covariates in schema order.
struct DurationData {
    std::vector<double> tau;
    std::vector<std::vector<double>> covariates;  // covariates[j][i] is covariate j of observation i
    std::vector<CovariateSpec> schema;

    std::size_t size() const { return tau.size(); }
    std::string fingerprint() const;
};

struct FitOptions {
    double gradient_tolerance = 1e-6;
    int max_iterations = 500;
    double alpha_cap = 1e6;
    std::size_t min_records = 50;
};

// rate_i = exp(-x_i' theta); E(tau|x) = alpha exp(x' theta), V(tau|x) = alpha exp(2 x' theta).
struct LatencyModel {
    ModelKind kind = ModelKind::gamma;
    double alpha = 1.0;
    std::vector<double> theta;  // intercept first, then one entry per schema covariate
    std::vector<CovariateSpec> schema;
    std::vector<double> theta_se;
    double alpha_se = 0.0;
    double log_likelihood = 0.0;
    std::size_t n_obs = 0;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool near_degenerate = false;
    std::vector<std::string> dropped_covariates;
    std::string data_fingerprint;
    std::optional<Day> fit_day;

    std::size_t parameter_count() const { return theta.size() + (kind == ModelKind::gamma ? 1 : 0); }
    double linear_predictor(const std::vector<double>& raw_covariates) const;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

// `with_covariates = false` fits an intercept-only model on the same data.
LatencyModel fit(const DurationData& data, ModelKind kind, bool with_covariates, const FitOptions& options = {});

// Mean log-likelihood and its gradient in (theta, log alpha); exposed for derivative checks.
double mean_log_likelihood(const DurationData& data, const std::vector<std::size_t>& columns, ModelKind kind,
                           const std::vector<double>& params, std::vector<double>* gradient);

Moments predict_moments(const LatencyModel& model, const std::vector<double>& raw_covariates);

struct LrTest {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

LrTest lr_test(const LatencyModel& restricted, const LatencyModel& unrestricted);

double mspe(const LatencyModel& model, const DurationData& data);

struct BlockTimeStats {
    double mean = 0.0;      // minutes
    double variance = 0.0;  // minutes^2
};

struct TotalMoments {
    double m1 = 0.0;
    double m2 = 0.0;
};

TotalMoments total_latency_moments(double e_tau, double v_tau, const BlockTimeStats& blocks, int confirmations);

// Raw moments E(tau^k), k = 1..4, of a gamma law with shape alpha and rate beta.
struct RawMoments {
    double m1, m2, m3, m4;
};
RawMoments gamma_raw_moments(double alpha, double rate);

}  // namespace latarb::latency
