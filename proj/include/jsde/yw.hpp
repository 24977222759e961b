#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace jsde {

/// Yamada-Watanabe function triple (a_k, psi_k, phi_k) for one index k.
///
/// a_k = exp(-k(k+1)/2). The concrete psi_k is x^{-1} times a hat that is
/// piecewise linear in log x: it ramps up over the first log-quarter of
/// (a_k, a_{k-1}), is flat over the middle half, and ramps down over the
/// last quarter. The flat part alone integrates to k/2 against dx/x, so the
/// normalization constant is exactly 3/2 and psi_k(x) = 4/(3kx) * hat <=
/// 2/(kx). phi_k and its derivatives are evaluated from piecewise closed-form
/// antiderivatives, so derivative consistency is at machine precision and
/// phi_k is exactly affine outside (a_k, a_{k-1}).
class YWFunctions {
public:
    explicit YWFunctions(int k);

    int k() const { return k_; }
    double a_lo() const { return x_[0]; }   // a_k
    double a_hi() const { return x_[3]; }   // a_{k-1}
    double norm_const() const { return 1.5; }

    double psi(double x) const;
    double phi(double z) const;
    double phi_prime(double z) const;
    double phi_second(double z) const;

    /// Second-order difference D_h phi(zeta) = phi(zeta+h) - phi(zeta) -
    /// phi'(zeta) h. Returns an exact 0.0 whenever the segment from zeta to
    /// zeta+h avoids the support of psi_k (both endpoints in [-a_k, a_k], or
    /// both at or beyond a_{k-1} on the same side).
    double d_phi(double zeta, double h) const;

    /// Independent evaluation of D_h phi(zeta) through the Taylor-remainder
    /// integral h^2 int_0^1 psi(|zeta+th|)(1-t) dt, by piecewise quadrature
    /// split at the knot crossings.
    double d_phi_integral_form(double zeta, double h) const;

    /// Integral of psi over its support by quadrature (the closed-form value
    /// is exactly 1); used as a cross-check.
    double psi_integral_quadrature(double tol = 1e-12) const;

    /// Knots of phi in increasing order: a_k and the two interior log-quarter
    /// points and a_{k-1}.
    std::array<double, 4> knots() const { return x_; }

private:
    double phi_abs(double z_abs) const;        // phi on [0, inf)
    double psi_cumulative(double y_abs) const; // int_0^y psi

    int k_ = 0;
    double amp_ = 0.0;                // 4/(3k)
    double quarter_ = 0.0;            // k/4 in log scale
    std::array<double, 4> t_{};       // log knots
    std::array<double, 4> x_{};       // knots
    std::array<double, 4> phi_cum_{}; // phi at the knots
};

YWFunctions make_yw(int k);

struct PropertyCheck {
    std::string property;
    double max_violation = 0.0;
    double witness = 0.0;
    bool pass = true;
};

struct PropertyReport {
    std::vector<PropertyCheck> checks;
    bool pass = true;
};

/// Grid checks of the phi_k properties: 0 <= phi <= |z|, phi_k <= phi_{k+1},
/// |phi'| <= 1 with the sign of z, and 0 <= |z| phi'' <= 2/k + tol.
PropertyReport verify_properties(const YWFunctions& yw,
                                 std::span<const double> grid, double tol);

struct Lemma31Report {
    bool applicable = true;       // sign precondition held
    double quadrature = 0.0;      // int_0^1 l^2 (1-t)/|u+tl| dt
    double closed_form = 0.0;     // (u+l) log(1+l/u) - l, sign-adjusted
    double d_phi_value = 0.0;
    double middle_bound = 0.0;    // (2/k) * quadrature
    double final_bound = 0.0;     // 2 l^2 / (k|u|)
    bool identity_ok = false;
    bool chain_ok = false;
    std::string note;
};

/// Checks the closed-form identity behind Lemma 3.1 against quadrature and
/// the inequality chain D_l phi_k(x-y) <= (2/k) Q <= 2 l^2 / (k|x-y|).
Lemma31Report lemma31_check(double x, double y, double l, int k);

/// True iff D_l phi_k(x-y) is exactly zero. Under the sign precondition
/// (c(x-y)+l and x-y share sign) this must hold whenever
/// (1-c)|x-y| >= a_{k-1}.
bool vanishing_check(double c, double x, double y, double l, int k);

}  // namespace jsde
