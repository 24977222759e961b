#pragma once

#include <optional>
#include <string>

#include "jsde/sde_core.hpp"

namespace jsde {

/// A C^2 test function with bounded derivatives and declared sup-norms.
struct TestFunction {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> f_prime;
    std::function<double(double)> f_second;
    double f_bound = 0.0;
    double fp_bound = 0.0;
    double fpp_bound = 0.0;
};

TestFunction tf_cos();
/// Exactly x on [-flat, flat], then a C^2 ramp of width `width` to a
/// constant plateau. Bounded with bounded derivatives.
TestFunction tf_capped_linear(double flat = 4.0, double width = 2.0);
TestFunction tf_gaussian_bump();
TestFunction test_function_by_name(const std::string& name);

/// Throws unless finite differences of f match f_prime and of f_prime match
/// f_second at second order on a probe grid.
void validate_test_function(const TestFunction& tf);

/// Truncation levels at which the generator is evaluated; chi_m, when set,
/// composes the state truncation into the g0 argument (the A_n variant).
struct GeneratorTrunc {
    int n0 = 0;
    int n1 = 0;
    std::optional<double> chi_m;
};

struct GeneratorValue {
    double value = 0.0;
    double tail_error_bound = 0.0;
    bool tail_bound_available = false;
};

/// Af(x) = 1/2 sigma^2 f'' + int_{U_0} D_{g0} f dmu0 + b f' +
/// int_{U_2} Delta_{g1} f dmu1, integrated over the first n0 (resp. the
/// U_2-designated, up to n1) layers. The attached truncation error bound is
/// 1/2 ||f''|| int_tail g0^2 dmu0 + ||f'|| int_tail |g1| dmu1 when the
/// measures provide tail bounds.
GeneratorValue apply_generator(const ModelSpec& model, const TestFunction& tf,
                               double x, const GeneratorTrunc& trunc, double tol);

struct MartingaleReport {
    double mean = 0.0;
    double se = 0.0;
    double bias_budget = 0.0;  // declared O(h) bound for the left-endpoint rule
    int n_paths = 0;
    bool pass = false;  // |mean| <= 3 se + bias_budget
};

/// Monte Carlo test of the martingale characterization: per path,
/// Z = f(x(t)) - f(x(0)) - sum_events A_n f(x(s_left)) ds with the
/// left-endpoint rule on the event timeline, A_n matching the simulated
/// truncation levels.
MartingaleReport martingale_residual(const ModelSpec& model,
                                     const TruncationParams& trunc,
                                     const TestFunction& tf, double x0, double t,
                                     int n_paths, std::uint64_t seed,
                                     int threads = 1);

}  // namespace jsde
