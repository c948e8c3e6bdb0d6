#pragma once

namespace latarb::bounds {

enum class UtilityKind { linear, crra, cara };

// CRRA: U(r) = (w0 + r)^(1-gamma) / (1-gamma), log(w0 + r) at gamma = 1.
// The closed-form CRRA bound evaluates the utility derivatives at the return itself,
// which corresponds to w0 = 0; w0 = 1 gives utility over gross returns.
// CARA: U(r) = (1 - exp(-gamma (1 + r))) / gamma.
struct Utility {
    UtilityKind kind = UtilityKind::crra;
    double gamma = 2.0;
    double wealth_offset = 0.0;

    static Utility linear() { return {UtilityKind::linear, 0.0, 0.0}; }
    static Utility crra(double gamma, double wealth_offset = 0.0) { return {UtilityKind::crra, gamma, wealth_offset}; }
    static Utility cara(double gamma) { return {UtilityKind::cara, gamma, 0.0}; }

    bool in_domain(double r) const;
    double value(double r) const;
    double inverse(double u) const;
    double derivative(double r) const;
    // U^(k)(x) / (k! U'(x)) for k in 2..4.
    double taylor_coefficient(int k, double x) const;
    // d/dx of taylor_coefficient(k, x).
    double taylor_coefficient_slope(int k, double x) const;

    void validate() const;
};

}  // namespace latarb::bounds
