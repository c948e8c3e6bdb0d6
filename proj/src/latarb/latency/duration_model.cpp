#include "latarb/latency/duration_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "latarb/common/error.hpp"
#include "latarb/common/hash.hpp"
#include "latarb/common/log.hpp"
#include "latarb/common/stats.hpp"

namespace latarb::latency {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Design {
    MatrixXd x;  // n x p, intercept in column 0
    VectorXd tau;
    VectorXd log_tau;
};

Design build_design(const DurationData& data, const std::vector<std::size_t>& columns) {
    const std::size_t n = data.size();
    Design d;
    d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size() + 1));
    d.tau.resize(static_cast<Eigen::Index>(n));
    d.log_tau.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        auto r = static_cast<Eigen::Index>(i);
        d.tau(r) = data.tau[i];
        d.log_tau(r) = std::log(data.tau[i]);
        d.x(r, 0) = 1.0;
        for (std::size_t j = 0; j < columns.size(); ++j) {
            std::size_t c = columns[j];
            d.x(r, static_cast<Eigen::Index>(j + 1)) = apply_transform(data.schema[c].transform, data.covariates[c][i]);
        }
    }
    return d;
}

// Mean log-likelihood over (theta, [log alpha]); alpha is fixed when `fixed_alpha` is set.
struct Objective {
    const Design& d;
    std::optional<double> fixed_alpha;

    Eigen::Index dim() const { return d.x.cols() + (fixed_alpha ? 0 : 1); }

    double evaluate(const VectorXd& p, VectorXd* grad, MatrixXd* hess) const {
        const Eigen::Index k = d.x.cols();
        const double n = static_cast<double>(d.tau.size());
        const double alpha = fixed_alpha ? *fixed_alpha : std::exp(p(k));
        const double lg = boost::math::lgamma(alpha);
        const VectorXd eta = d.x * p.head(k);
        CompensatedSum ll;
        CompensatedSum s_phi;
        VectorXd g_theta = VectorXd::Zero(k);
        MatrixXd h_theta = MatrixXd::Zero(k, k);
        VectorXd x_sum = VectorXd::Zero(k);
        for (Eigen::Index i = 0; i < d.tau.size(); ++i) {
            double scaled = d.tau(i) * std::exp(-eta(i));
            ll.add(-alpha * eta(i) - lg + (alpha - 1.0) * d.log_tau(i) - scaled);
            if (!grad) continue;
            auto xi = d.x.row(i).transpose();
            g_theta += xi * (scaled - alpha);
            s_phi.add(-eta(i) + d.log_tau(i));
            if (hess) {
                h_theta.noalias() -= scaled * xi * xi.transpose();
                x_sum += xi;
            }
        }
        if (grad) {
            grad->resize(dim());
            grad->head(k) = g_theta / n;
            if (!fixed_alpha) {
                double psi = boost::math::digamma(alpha);
                (*grad)(k) = alpha * (s_phi.value() - n * psi) / n;
                if (hess) {
                    hess->resize(dim(), dim());
                    hess->topLeftCorner(k, k) = h_theta / n;
                    hess->block(0, k, k, 1) = -alpha * x_sum / n;
                    hess->block(k, 0, 1, k) = (-alpha * x_sum / n).transpose();
                    (*hess)(k, k) = (*grad)(k) - alpha * alpha * boost::math::trigamma(alpha);
                }
            } else if (hess) {
                *hess = h_theta / n;
            }
        }
        return ll.value() / n;
    }
};

double inverse_trigamma(double v, double lo, double hi) {
    // trigamma is decreasing; bisect on log alpha.
    double a = std::log(lo), b = std::log(hi);
    for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
        double m = 0.5 * (a + b);
        if (boost::math::trigamma(std::exp(m)) > v)
            a = m;
        else
            b = m;
    }
    return std::exp(0.5 * (a + b));
}

bool has_zero_variance(const std::vector<double>& raw, CovariateTransform t) {
    std::vector<double> x(raw.size());
    std::transform(raw.begin(), raw.end(), x.begin(), [t](double v) { return apply_transform(t, v); });
    double m = mean(x);
    double v = sample_variance(x);
    return !(v > 1e-14 * std::max(1.0, m * m));
}

}  // namespace

const char* model_kind_name(ModelKind kind) { return kind == ModelKind::gamma ? "gamma" : "exponential"; }

ModelKind parse_model_kind(const std::string& name) {
    if (name == "gamma") return ModelKind::gamma;
    if (name == "exponential") return ModelKind::exponential;
    fail(ErrorCode::invalid_argument, "unknown latency model kind '" + name + "'");
}

const char* transform_name(CovariateTransform t) {
    switch (t) {
        case CovariateTransform::identity: return "identity";
        case CovariateTransform::log1p: return "log1p";
        case CovariateTransform::log: return "log";
    }
    return "?";
}

CovariateTransform parse_transform(const std::string& name) {
    if (name == "identity") return CovariateTransform::identity;
    if (name == "log1p") return CovariateTransform::log1p;
    if (name == "log") return CovariateTransform::log;
    fail(ErrorCode::invalid_argument, "unknown covariate transform '" + name + "'");
}

double apply_transform(CovariateTransform t, double raw) {
    switch (t) {
        case CovariateTransform::identity: return raw;
        case CovariateTransform::log1p: return std::log1p(raw);
        case CovariateTransform::log: return std::log(raw);
    }
    return raw;
}

std::vector<CovariateSpec> default_covariates() {
    return {{"fee_per_byte", CovariateTransform::log1p}, {"mempool_size", CovariateTransform::log}};
}

std::string DurationData::fingerprint() const {
    Fnv1a64 h;
    h.update_value(tau.size());
    for (double t : tau) h.update_value(t);
    for (const auto& spec : schema) h.update(spec.name);
    for (const auto& col : covariates)
        for (double v : col) h.update_value(v);
    return h.hex();
}

double LatencyModel::linear_predictor(const std::vector<double>& raw_covariates) const {
    if (raw_covariates.size() != schema.size())
        fail(ErrorCode::schema_mismatch, "expected " + std::to_string(schema.size()) + " covariates, got " +
                                             std::to_string(raw_covariates.size()));
    double eta = theta.at(0);
    for (std::size_t j = 0; j < schema.size(); ++j)
        eta += theta[j + 1] * apply_transform(schema[j].transform, raw_covariates[j]);
    return eta;
}

double mean_log_likelihood(const DurationData& data, const std::vector<std::size_t>& columns, ModelKind kind,
                           const std::vector<double>& params, std::vector<double>* gradient) {
    Design d = build_design(data, columns);
    Objective obj{d, kind == ModelKind::exponential ? std::optional<double>(1.0) : std::nullopt};
    if (static_cast<Eigen::Index>(params.size()) != obj.dim())
        fail(ErrorCode::invalid_argument, "parameter vector has wrong length");
    VectorXd p = Eigen::Map<const VectorXd>(params.data(), obj.dim());
    VectorXd g;
    double value = obj.evaluate(p, gradient ? &g : nullptr, nullptr);
    if (gradient) gradient->assign(g.data(), g.data() + g.size());
    return value;
}

LatencyModel fit(const DurationData& data, ModelKind kind, bool with_covariates, const FitOptions& options) {
    const std::size_t n = data.size();
    if (n < options.min_records)
        fail(ErrorCode::invalid_argument, "need at least " + std::to_string(options.min_records) +
                                              " records to fit, got " + std::to_string(n));
    if (data.covariates.size() != data.schema.size()) fail(ErrorCode::schema_mismatch, "covariate columns do not match schema");
    for (std::size_t i = 0; i < n; ++i)
        if (!(data.tau[i] > 0.0) || !std::isfinite(data.tau[i]))
            fail(ErrorCode::invalid_argument, "latency must be positive and finite (record " + std::to_string(i) + ")");

    LatencyModel model;
    model.kind = kind;
    model.n_obs = n;
    model.data_fingerprint = data.fingerprint();

    std::vector<std::size_t> columns;
    if (with_covariates) {
        for (std::size_t j = 0; j < data.schema.size(); ++j) {
            const auto& col = data.covariates[j];
            if (col.size() != n) fail(ErrorCode::schema_mismatch, "covariate '" + data.schema[j].name + "' has wrong length");
            for (double v : col) {
                double t = apply_transform(data.schema[j].transform, v);
                if (!std::isfinite(t))
                    fail(ErrorCode::invalid_argument, "non-finite transformed covariate '" + data.schema[j].name + "'");
            }
            if (has_zero_variance(col, data.schema[j].transform)) {
                log::warn("dropping zero-variance covariate '" + data.schema[j].name + "'");
                model.dropped_covariates.push_back(data.schema[j].name);
                continue;
            }
            columns.push_back(j);
        }
    }
    for (std::size_t c : columns) model.schema.push_back(data.schema[c]);

    Design d = build_design(data, columns);
    const Eigen::Index k = d.x.cols();

    // Start: OLS of log tau on x, then alpha from the residual variance via trigamma.
    VectorXd b = d.x.colPivHouseholderQr().solve(d.log_tau);
    VectorXd resid = d.log_tau - d.x * b;
    double s2 = resid.squaredNorm() / std::max<double>(1.0, static_cast<double>(n) - static_cast<double>(k));
    double alpha0 = 1.0;
    std::optional<double> fixed_alpha;
    if (kind == ModelKind::exponential) {
        fixed_alpha = 1.0;
    } else if (s2 <= boost::math::trigamma(options.alpha_cap)) {
        fixed_alpha = options.alpha_cap;
        model.near_degenerate = true;
        log::warn("latency sample has no dispersion; shape pinned at " + std::to_string(options.alpha_cap));
    } else {
        alpha0 = inverse_trigamma(s2, 1e-4, options.alpha_cap);
    }
    double a_start = fixed_alpha ? *fixed_alpha : alpha0;
    b(0) -= boost::math::digamma(a_start);

    Objective obj{d, fixed_alpha};
    VectorXd p(obj.dim());
    p.head(k) = b;
    if (!fixed_alpha) p(k) = std::log(alpha0);

    auto neg = [&](const VectorXd& q, VectorXd* g, MatrixXd* h) {
        double v = obj.evaluate(q, g, h);
        if (g) *g = -*g;
        if (h) *h = -*h;
        return -v;
    };
    auto fresh_inverse = [&](const VectorXd& q) -> MatrixXd {
        VectorXd g;
        MatrixXd h;
        neg(q, &g, &h);
        Eigen::LLT<MatrixXd> llt(h);
        if (llt.info() == Eigen::Success) return llt.solve(MatrixXd::Identity(h.rows(), h.cols()));
        return MatrixXd::Identity(h.rows(), h.cols());
    };

    const double log_cap = std::log(options.alpha_cap);
    VectorXd g;
    double f = neg(p, &g, nullptr);
    MatrixXd hinv = fresh_inverse(p);
    bool fresh = true;
    int it = 0;
    for (; it < options.max_iterations && g.norm() >= options.gradient_tolerance; ++it) {
        VectorXd step = -hinv * g;
        if (g.dot(step) >= 0.0) {
            hinv = fresh_inverse(p);
            step = -hinv * g;
            fresh = true;
        }
        double t = 1.0;
        VectorXd p_new, g_new;
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            p_new = p + t * step;
            if (!fixed_alpha && p_new(k) > log_cap) p_new(k) = log_cap;
            f_new = neg(p_new, &g_new, nullptr);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * t * g.dot(step)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (fresh) break;
            hinv = fresh_inverse(p);
            fresh = true;
            continue;
        }
        VectorXd s = p_new - p;
        VectorXd y = g_new - g;
        double sy = s.dot(y);
        if (sy > 1e-300) {
            double rho = 1.0 / sy;
            MatrixXd eye = MatrixXd::Identity(s.size(), s.size());
            hinv = (eye - rho * s * y.transpose()) * hinv * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
            fresh = false;
        }
        p = p_new;
        g = g_new;
        f = f_new;
        if (!fixed_alpha && p(k) >= log_cap) {
            model.near_degenerate = true;
            break;
        }
    }
    model.iterations = it;
    model.gradient_norm = g.norm();
    if (!model.near_degenerate && !(g.norm() < options.gradient_tolerance)) {
        std::ostringstream msg;
        msg << "latency model did not converge after " << it << " iterations (gradient norm " << g.norm()
            << ", mean log-likelihood " << -f << ")";
        fail(ErrorCode::no_convergence, msg.str());
    }

    model.alpha = fixed_alpha ? *fixed_alpha : std::exp(p(k));
    model.theta.assign(p.data(), p.data() + k);
    model.log_likelihood = -f * static_cast<double>(n);

    VectorXd gg;
    MatrixXd h;
    neg(p, &gg, &h);
    MatrixXd info = h * static_cast<double>(n);
    Eigen::LLT<MatrixXd> llt(info);
    model.theta_se.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::quiet_NaN());
    model.alpha_se = fixed_alpha ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    if (llt.info() == Eigen::Success) {
        MatrixXd cov = llt.solve(MatrixXd::Identity(info.rows(), info.cols()));
        for (Eigen::Index j = 0; j < k; ++j) model.theta_se[static_cast<std::size_t>(j)] = std::sqrt(cov(j, j));
        if (!fixed_alpha) model.alpha_se = model.alpha * std::sqrt(cov(k, k));
    } else {
        log::warn("observed information is not positive definite; standard errors unavailable");
    }
    return model;
}

Moments predict_moments(const LatencyModel& model, const std::vector<double>& raw_covariates) {
    double eta = model.linear_predictor(raw_covariates);
    double e = model.alpha * std::exp(eta);
    return {e, model.alpha * std::exp(2.0 * eta)};
}

LrTest lr_test(const LatencyModel& restricted, const LatencyModel& unrestricted) {
    if (restricted.data_fingerprint != unrestricted.data_fingerprint)
        fail(ErrorCode::not_nested, "models were fitted on different data");
    if (restricted.kind == ModelKind::gamma && unrestricted.kind == ModelKind::exponential)
        fail(ErrorCode::not_nested, "a gamma model is not nested in an exponential model");
    for (const auto& spec : restricted.schema) {
        bool found = std::any_of(unrestricted.schema.begin(), unrestricted.schema.end(), [&](const CovariateSpec& u) {
            return u.name == spec.name && u.transform == spec.transform;
        });
        if (!found) fail(ErrorCode::not_nested, "covariate '" + spec.name + "' missing from the unrestricted model");
    }
    LrTest out;
    out.dof = static_cast<int>(unrestricted.parameter_count()) - static_cast<int>(restricted.parameter_count());
    out.statistic = std::max(0.0, 2.0 * (unrestricted.log_likelihood - restricted.log_likelihood));
    out.p_value = out.dof > 0 ? boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic) : 1.0;
    return out;
}

double mspe(const LatencyModel& model, const DurationData& data) {
    if (data.size() == 0) fail(ErrorCode::invalid_argument, "mspe needs at least one record");
    std::vector<std::size_t> index;
    for (const auto& spec : model.schema) {
        auto it = std::find_if(data.schema.begin(), data.schema.end(),
                               [&](const CovariateSpec& s) { return s.name == spec.name; });
        if (it == data.schema.end()) fail(ErrorCode::schema_mismatch, "data lacks covariate '" + spec.name + "'");
        index.push_back(static_cast<std::size_t>(it - data.schema.begin()));
    }
    CompensatedSum s;
    std::vector<double> x(index.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < index.size(); ++j) x[j] = data.covariates[index[j]][i];
        double err = data.tau[i] - predict_moments(model, x).mean;
        s.add(err * err);
    }
    return s.value() / static_cast<double>(data.size());
}

TotalMoments total_latency_moments(double e_tau, double v_tau, const BlockTimeStats& blocks, int confirmations) {
    if (confirmations < 1) fail(ErrorCode::invalid_argument, "confirmations must be >= 1");
    if (!(e_tau > 0.0) || !(v_tau >= 0.0) || !(blocks.mean >= 0.0) || !(blocks.variance >= 0.0))
        fail(ErrorCode::invalid_argument, "latency moments must be non-negative with positive mean");
    double extra = static_cast<double>(confirmations - 1);
    double shift = blocks.mean * extra + e_tau;
    return {shift, v_tau + blocks.variance * extra * extra + shift * shift};
}

RawMoments gamma_raw_moments(double alpha, double rate) {
    if (!(alpha > 0.0) || !(rate > 0.0)) fail(ErrorCode::invalid_argument, "gamma shape and rate must be positive");
    double m1 = alpha / rate;
    double m2 = m1 * (alpha + 1.0) / rate;
    double m3 = m2 * (alpha + 2.0) / rate;
    double m4 = m3 * (alpha + 3.0) / rate;
    return {m1, m2, m3, m4};
}

}  // namespace latarb::latency
