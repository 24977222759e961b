#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace jsde {

/// Raised when an adaptive quadrature cannot reach the requested tolerance.
struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

using ScalarFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod integration of f over [a, b]; either endpoint may
/// be infinite. Throws QuadratureError if the error estimate stays above
/// max(tol, tol*|result|).
double integrate_gk(const ScalarFn& f, double a, double b, double tol,
                    double* error_estimate = nullptr);

/// Same, but integrates piecewise between sorted interior breakpoints.
/// Breakpoints outside (a, b) are ignored. Meant for integrands with known
/// kinks or jumps.
double integrate_gk_pieces(const ScalarFn& f, double a, double b,
                           std::span<const double> breakpoints, double tol);

}  // namespace jsde
