#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jsde/sde_core.hpp"

namespace jsde {

/// A closed-form candidate solution of the deterministic flow dx = -phi(x) dt
/// (sign +1) or dx = +phi(x) dt (sign -1).
struct OdeSolution {
    std::string name;
    std::function<double(double)> y;
    std::function<double(double)> y_prime;  // may be empty: centered differences
    std::vector<double> kinks;
    double t_lo = 0.0;
    double t_hi = 1.0;
    int sign = +1;
};

/// A pair identity: a closed-form value and an independent quadrature recipe
/// that must agree to tol on admissible (x, y).
struct PairIdentity {
    std::string name;
    std::function<double(double, double)> closed_form;
    std::function<double(double, double)> quadrature;
    double tol = 1e-6;
};

struct AnalyticFacts {
    std::optional<std::pair<double, double>> invariant_interval;
    std::vector<OdeSolution> ode_solutions;
    std::vector<PairIdentity> identity_checks;
    bool compensator_series_converged = true;
    double r_max = 0.0;  // Doering-Barczy r truncation, 0 when not applicable
};

struct BuiltModel {
    ModelSpec spec;
    AnalyticFacts facts;
};

// coefficient kernels of the concrete equations
double h_alpha_fn(double alpha, double x);
double counterexample_phi(double alpha, double x);         // Holder bump on [0, 1]
double bl_q(double x, double r);                           // Fleming-Viot kernel
double db_g(double x, double u, double r);                 // self-similar kernel

/// Single compensated atom driver with rate lambda and jump h_alpha(x); the
/// between-jump flow is exactly dx = -lambda h_alpha(x) dt.
BuiltModel model_h_alpha(double alpha, double lambda);

/// Same driver with the non-monotone Holder bump; carries the two distinct
/// flow solutions started at 1 that break uniqueness of the deterministic
/// core.
BuiltModel model_counterexample(double alpha, double lambda);

/// Fleming-Viot one-point motion: marks (z, r) with intensity nu(dz) dr on
/// (0,1]^2, jump z*q(x,r), compensator identically zero, invariant in [0,1].
BuiltModel model_bertoin_legall(const LayeredMeasure& nu);

/// Self-similar-process equation: marks (u, r) on (0,inf) x (0, r_max],
/// jump -1{rx<=1} x (1-e^-u) with closed-form compensator
/// -min(r_max x, 1) int (1-e^-u) mu(du); non-negative domain.
BuiltModel model_doering_barczy(const LayeredMeasure& mu, double r_max);

/// Max over the grid of |y'(t) - sign * (-phi(y(t)))|, skipping points within
/// 1e-6 of declared kinks; centered differences of step 1e-6 when no analytic
/// derivative is given.
double ode_residual(const std::function<double(double)>& phi,
                    const OdeSolution& sol, std::span<const double> grid);

}  // namespace jsde
