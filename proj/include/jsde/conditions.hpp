#pragma once

#include <map>
#include <span>
#include <string>

#include "jsde/sde_core.hpp"

namespace jsde {

/// Concave non-decreasing modulus with divergent reciprocal integral near 0.
/// Restricted to a parametric family for which the divergence is known
/// analytically: r(z) = L z, or r(z) = L z log(1/z) continued affinely above
/// the cutoff (cutoff <= e^-2 keeps it non-decreasing and concave).
class ConcaveModulus {
public:
    enum class Kind { Linear, ZLogInv };

    static ConcaveModulus linear(double scale);
    static ConcaveModulus z_log_inv(double scale, double cutoff = 0.1);
    /// Accepts "linear" or "z_log_inv"; anything else (for example a sqrt
    /// modulus, whose reciprocal integral converges) is rejected.
    static ConcaveModulus from_name(const std::string& name, double scale,
                                    double cutoff = 0.1);

    double operator()(double z) const;
    Kind kind() const { return kind_; }

private:
    ConcaveModulus(Kind kind, double scale, double cutoff);
    Kind kind_;
    double scale_;
    double cutoff_;
    double slope_at_cutoff_ = 0.0;
    double value_at_cutoff_ = 0.0;
};

struct CheckResult {
    std::string condition;
    bool pass = true;
    double worst_ratio = 0.0;  // largest lhs/rhs encountered (or violation size)
    double witness_x = 0.0;
    double witness_y = 0.0;
    std::string note;
};

/// Condition (3.a): |b1(x)-b1(y)| + int_{U_2} |g1(x,u)-g1(y,u)| mu1(du)
/// <= r_m(|x-y|) over grid pairs within [-m, m].
CheckResult check_3a(const ModelSpec& model, int m, const ConcaveModulus& r_m,
                     std::span<const double> x_grid);

/// Monotonicity part of (3.b)/(3.c): x -> c x + g0(x, u) non-decreasing over
/// consecutive grid points, for marks sampled from every mu0 layer.
CheckResult check_monotone(const ModelSpec& model, double c,
                           std::span<const double> x_grid, int marks_per_layer,
                           std::uint64_t seed);

/// Quadratic bound of (3.b): |sigma(x)-sigma(y)|^2 + int l0^2 dmu0
/// <= K_m |x-y| over grid pairs within [-m, m].
CheckResult check_3b(const ModelSpec& model, int m, double K_m,
                     std::span<const double> x_grid);

/// Pointwise Holder bound of (3.c): |l0(x,y,u)| <= |x-y|^p_m f_m(u) on
/// sampled marks, plus numerical finiteness of int (f_m ^ f_m^2) dmu0.
CheckResult check_3c(const ModelSpec& model, int m, double p_m, const MarkFn& f_m,
                     std::span<const double> x_grid, int marks_per_layer,
                     std::uint64_t seed);

enum class GrowthKind { K4a, K5a, K6a, K6b };

/// Growth conditions (4.a), (5.a), (6.a), (6.b). The scalar parameter is the
/// constant K; for (6.b) the non-decreasing envelope is taken from the linear
/// family L(x) = K (1 + x).
CheckResult check_growth(const ModelSpec& model, GrowthKind kind,
                         std::span<const double> x_grid, double K);

/// Declared certificate parameters plus the outcome of every probe.
struct ConditionCertificate {
    int m = 1;
    double c = 1.0;
    double K_m = 0.0;
    double p_m = 0.5;
    ConcaveModulus r_m = ConcaveModulus::linear(1.0);
    MarkFn f_m;
    double alpha_m = 2.0;  // declared; the estimate is recorded in checks
    std::map<std::string, CheckResult> checks;

    bool all_passed() const;
};

std::vector<double> uniform_grid(double lo, double hi, int points);

}  // namespace jsde
