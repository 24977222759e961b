#include "jsde/yw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jsde/quadrature.hpp"

namespace jsde {

namespace {

// Region polynomial coefficients of Psi(y) = int_0^y psi in s = log y - t_a:
// Psi = alpha + beta s + gamma s^2.
struct RegionCoeffs {
    double alpha, beta, gamma;
};

// int_0^S (alpha + beta s + gamma s^2) e^s ds, to be scaled by e^{t_a}
double poly_exp_integral(const RegionCoeffs& c, double s) {
    const double es = std::exp(s);
    return c.alpha * (es - 1.0) + c.beta * ((s - 1.0) * es + 1.0) +
           c.gamma * ((s * s - 2.0 * s + 2.0) * es - 2.0);
}

}  // namespace

YWFunctions::YWFunctions(int k) : k_(k) {
    if (k < 1) throw std::invalid_argument("yw: k must be >= 1");
    // a_k underflows once k(k+1)/2 exceeds ~700
    if (0.5 * static_cast<double>(k) * (k + 1.0) > 700.0) {
        throw std::invalid_argument("yw: k too large, a_k would underflow");
    }
    amp_ = 4.0 / (3.0 * k);
    quarter_ = 0.25 * k;
    const double log_a_k = -0.5 * static_cast<double>(k) * (k + 1.0);
    t_ = {log_a_k, log_a_k + quarter_, log_a_k + 3.0 * quarter_,
          log_a_k + 4.0 * quarter_};
    for (int i = 0; i < 4; ++i) x_[i] = std::exp(t_[i]);

    const RegionCoeffs r0{0.0, 0.0, amp_ / (2.0 * quarter_)};
    const RegionCoeffs r1{amp_ * quarter_ / 2.0, amp_, 0.0};
    const RegionCoeffs r2{amp_ * 2.5 * quarter_, amp_, -amp_ / (2.0 * quarter_)};
    phi_cum_[0] = 0.0;
    phi_cum_[1] = x_[0] * poly_exp_integral(r0, quarter_);
    phi_cum_[2] = phi_cum_[1] + x_[1] * poly_exp_integral(r1, 2.0 * quarter_);
    phi_cum_[3] = phi_cum_[2] + x_[2] * poly_exp_integral(r2, quarter_);
}

YWFunctions make_yw(int k) { return YWFunctions(k); }

double YWFunctions::psi(double x) const {
    if (!(x > x_[0]) || !(x < x_[3])) return 0.0;
    const double t = std::log(x);
    double hat;
    if (t <= t_[1]) {
        hat = (t - t_[0]) / quarter_;
    } else if (t <= t_[2]) {
        hat = 1.0;
    } else {
        hat = (t_[3] - t) / quarter_;
    }
    hat = std::clamp(hat, 0.0, 1.0);
    return amp_ * hat / x;
}

double YWFunctions::psi_cumulative(double y) const {
    if (y <= x_[0]) return 0.0;
    if (y >= x_[3]) return 1.0;
    const double t = std::log(y);
    if (t <= t_[1]) {
        const double s = std::max(t - t_[0], 0.0);
        return amp_ * s * s / (2.0 * quarter_);
    }
    if (t <= t_[2]) {
        const double s = t - t_[1];
        return amp_ * (quarter_ / 2.0 + s);
    }
    const double s = std::min(t - t_[2], quarter_);
    return std::min(amp_ * (2.5 * quarter_ + s - s * s / (2.0 * quarter_)), 1.0);
}

double YWFunctions::phi_abs(double z) const {
    if (z <= x_[0]) return 0.0;
    if (z >= x_[3]) return phi_cum_[3] + (z - x_[3]);
    const double t = std::log(z);
    if (t <= t_[1]) {
        const RegionCoeffs r0{0.0, 0.0, amp_ / (2.0 * quarter_)};
        return x_[0] * poly_exp_integral(r0, std::max(t - t_[0], 0.0));
    }
    if (t <= t_[2]) {
        const RegionCoeffs r1{amp_ * quarter_ / 2.0, amp_, 0.0};
        return phi_cum_[1] + x_[1] * poly_exp_integral(r1, t - t_[1]);
    }
    const RegionCoeffs r2{amp_ * 2.5 * quarter_, amp_, -amp_ / (2.0 * quarter_)};
    return phi_cum_[2] + x_[2] * poly_exp_integral(r2, std::min(t - t_[2], quarter_));
}

double YWFunctions::phi(double z) const { return phi_abs(std::abs(z)); }

double YWFunctions::phi_prime(double z) const {
    const double psi_cum = psi_cumulative(std::abs(z));
    return z >= 0.0 ? psi_cum : -psi_cum;
}

double YWFunctions::phi_second(double z) const { return psi(std::abs(z)); }

double YWFunctions::d_phi(double zeta, double h) const {
    const double other = zeta + h;
    // The segment between zeta and zeta+h avoids supp(psi): D vanishes
    // identically, so return an exact zero.
    if (std::abs(zeta) <= x_[0] && std::abs(other) <= x_[0]) return 0.0;
    if (zeta >= x_[3] && other >= x_[3]) return 0.0;
    if (zeta <= -x_[3] && other <= -x_[3]) return 0.0;
    return phi(other) - phi(zeta) - phi_prime(zeta) * h;
}

double YWFunctions::d_phi_integral_form(double zeta, double h) const {
    if (h == 0.0) return 0.0;
    // knots of t -> psi(|zeta + t h|): crossings of +-x_j and of 0
    std::vector<double> breaks;
    for (double knot : {x_[0], x_[1], x_[2], x_[3]}) {
        for (double target : {knot, -knot}) {
            const double t = (target - zeta) / h;
            if (t > 0.0 && t < 1.0) breaks.push_back(t);
        }
    }
    const double t_zero = -zeta / h;
    if (t_zero > 0.0 && t_zero < 1.0) breaks.push_back(t_zero);
    std::sort(breaks.begin(), breaks.end());
    const double integral = integrate_gk_pieces(
        [&](double t) { return psi(std::abs(zeta + t * h)) * (1.0 - t); }, 0.0, 1.0,
        breaks, 1e-12);
    return h * h * integral;
}

double YWFunctions::psi_integral_quadrature(double tol) const {
    return integrate_gk_pieces([&](double x) { return psi(x); }, x_[0], x_[3],
                               std::array<double, 2>{x_[1], x_[2]}, tol);
}

PropertyReport verify_properties(const YWFunctions& yw,
                                 std::span<const double> grid, double tol) {
    const YWFunctions next(yw.k() + 1);
    PropertyCheck bounds{"phi_between_0_and_abs", 0.0, 0.0, true};
    PropertyCheck monotone_k{"phi_k_le_phi_k_plus_1", 0.0, 0.0, true};
    PropertyCheck slope{"phi_prime_in_unit_band_signed", 0.0, 0.0, true};
    PropertyCheck curvature{"abs_z_phi_second_le_2_over_k", 0.0, 0.0, true};

    auto record = [](PropertyCheck& check, double violation, double z) {
        if (violation > check.max_violation) {
            check.max_violation = violation;
            check.witness = z;
        }
    };

    for (double z : grid) {
        const double p = yw.phi(z);
        record(bounds, std::max(-p, p - std::abs(z)), z);
        record(monotone_k, p - next.phi(z), z);
        const double d1 = yw.phi_prime(z);
        double slope_violation = std::abs(d1) - 1.0;
        if (z > 0.0) slope_violation = std::max(slope_violation, -d1);
        if (z < 0.0) slope_violation = std::max(slope_violation, d1);
        if (z == 0.0) slope_violation = std::max(slope_violation, std::abs(d1));
        record(slope, slope_violation, z);
        const double curve = std::abs(z) * yw.phi_second(z);
        record(curvature, std::max(-curve, curve - 2.0 / yw.k()), z);
    }

    PropertyReport report;
    for (auto* check : {&bounds, &monotone_k, &slope, &curvature}) {
        check->pass = check->max_violation <= tol;
        report.pass = report.pass && check->pass;
        report.checks.push_back(*check);
    }
    return report;
}

Lemma31Report lemma31_check(double x, double y, double l, int k) {
    Lemma31Report report;
    const double u = x - y;
    if (u == 0.0) throw std::invalid_argument("lemma31_check: x == y");
    const double shifted = u + l;
    if (u > 0.0 ? !(shifted > 0.0) : !(shifted < 0.0)) {
        report.applicable = false;
        report.note = "bound vacuous: x-y+l and x-y differ in sign";
        return report;
    }

    const YWFunctions yw(k);
    if (l == 0.0) {
        report.quadrature = report.closed_form = 0.0;
        report.d_phi_value = report.middle_bound = report.final_bound = 0.0;
        report.identity_ok = report.chain_ok = true;
        return report;
    }

    // quadrature of int_0^1 l^2 (1-t)/|u + t l| dt; the integrand is smooth
    // since u + t l never crosses zero under the precondition
    report.quadrature = integrate_gk(
        [&](double t) {
            return l * l * (1.0 - t) / std::abs(u + t * l);
        },
        0.0, 1.0, 1e-12);
    const double signed_value = shifted * std::log1p(l / u) - l;
    report.closed_form = u > 0.0 ? signed_value : -signed_value;
    report.identity_ok = std::abs(report.quadrature - report.closed_form) <= 1e-8;

    report.d_phi_value = yw.d_phi(u, l);
    report.middle_bound = 2.0 / k * report.quadrature;
    report.final_bound = 2.0 * l * l / (k * std::abs(u));
    report.chain_ok = report.d_phi_value <= report.middle_bound + 1e-12 &&
                      report.middle_bound <= report.final_bound + 1e-12;
    return report;
}

bool vanishing_check(double c, double x, double y, double l, int k) {
    (void)c;  // enters only through the admissibility of (x, y, l)
    const YWFunctions yw(k);
    return yw.d_phi(x - y, l) == 0.0;
}

}  // namespace jsde
