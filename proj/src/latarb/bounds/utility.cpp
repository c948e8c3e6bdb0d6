#include "latarb/bounds/utility.hpp"

#include <cmath>
#include <limits>

#include "latarb/common/error.hpp"

namespace latarb::bounds {
namespace {

bool is_log_case(double gamma) { return std::abs(gamma - 1.0) < 1e-12; }

}  // namespace

void Utility::validate() const {
    if (kind == UtilityKind::linear) return;
    if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorCode::invalid_argument, "risk aversion must be positive");
    if (kind == UtilityKind::crra && !(wealth_offset >= 0.0)) fail(ErrorCode::invalid_argument, "wealth offset must be >= 0");
}

bool Utility::in_domain(double r) const {
    if (kind != UtilityKind::crra) return std::isfinite(r);
    return wealth_offset + r > 0.0;
}

double Utility::value(double r) const {
    switch (kind) {
        case UtilityKind::linear: return r;
        case UtilityKind::cara: return (1.0 - std::exp(-gamma * (1.0 + r))) / gamma;
        case UtilityKind::crra: {
            double w = wealth_offset + r;
            if (!(w > 0.0)) return -std::numeric_limits<double>::infinity();
            if (is_log_case(gamma)) return std::log(w);
            return std::pow(w, 1.0 - gamma) / (1.0 - gamma);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double Utility::inverse(double u) const {
    switch (kind) {
        case UtilityKind::linear: return u;
        case UtilityKind::cara: return -std::log(1.0 - gamma * u) / gamma - 1.0;
        case UtilityKind::crra:
            if (is_log_case(gamma)) return std::exp(u) - wealth_offset;
            return std::pow((1.0 - gamma) * u, 1.0 / (1.0 - gamma)) - wealth_offset;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double Utility::derivative(double r) const {
    switch (kind) {
        case UtilityKind::linear: return 1.0;
        case UtilityKind::cara: return std::exp(-gamma * (1.0 + r));
        case UtilityKind::crra: return std::pow(wealth_offset + r, -gamma);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double Utility::taylor_coefficient(int k, double x) const {
    if (k < 2 || k > 4) fail(ErrorCode::invalid_argument, "Taylor coefficient order must be 2..4");
    switch (kind) {
        case UtilityKind::linear: return 0.0;
        case UtilityKind::cara: {
            // U^(k)/U' = (-gamma)^(k-1)
            double ratio = std::pow(-gamma, k - 1);
            return ratio / (k == 2 ? 2.0 : k == 3 ? 6.0 : 24.0);
        }
        case UtilityKind::crra: {
            double w = wealth_offset + x;
            double g = gamma;
            if (k == 2) return -g / (2.0 * w);
            if (k == 3) return g * (g + 1.0) / (6.0 * w * w);
            return -g * (g + 1.0) * (g + 2.0) / (24.0 * w * w * w);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double Utility::taylor_coefficient_slope(int k, double x) const {
    if (k < 2 || k > 4) fail(ErrorCode::invalid_argument, "Taylor coefficient order must be 2..4");
    if (kind != UtilityKind::crra) return 0.0;
    double w = wealth_offset + x;
    double g = gamma;
    if (k == 2) return g / (2.0 * w * w);
    if (k == 3) return -g * (g + 1.0) / (3.0 * w * w * w);
    return g * (g + 1.0) * (g + 2.0) / (8.0 * w * w * w * w);
}

}  // namespace latarb::bounds
