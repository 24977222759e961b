#include "jsde/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jsde {

ConcaveModulus::ConcaveModulus(Kind kind, double scale, double cutoff)
    : kind_(kind), scale_(scale), cutoff_(cutoff) {
    if (!(scale > 0.0)) throw std::invalid_argument("modulus: scale must be positive");
    if (kind_ == Kind::ZLogInv) {
        if (!(cutoff > 0.0) || cutoff > std::exp(-2.0)) {
            // beyond e^-2 the slope log(1/z) - 1 drops below 1; we keep a
            // comfortable margin so the affine continuation is concave
            cutoff_ = std::min(std::max(cutoff, 1e-12), std::exp(-2.0));
        }
        value_at_cutoff_ = cutoff_ * std::log(1.0 / cutoff_);
        slope_at_cutoff_ = std::log(1.0 / cutoff_) - 1.0;
    }
}

ConcaveModulus ConcaveModulus::linear(double scale) {
    return ConcaveModulus(Kind::Linear, scale, 0.0);
}

ConcaveModulus ConcaveModulus::z_log_inv(double scale, double cutoff) {
    return ConcaveModulus(Kind::ZLogInv, scale, cutoff);
}

ConcaveModulus ConcaveModulus::from_name(const std::string& name, double scale,
                                         double cutoff) {
    if (name == "linear") return linear(scale);
    if (name == "z_log_inv") return z_log_inv(scale, cutoff);
    throw std::invalid_argument(
        "modulus '" + name +
        "' is not in the admissible concave family (linear, z_log_inv)");
}

double ConcaveModulus::operator()(double z) const {
    if (z <= 0.0) return 0.0;
    if (kind_ == Kind::Linear) return scale_ * z;
    if (z <= cutoff_) return scale_ * z * std::log(1.0 / z);
    return scale_ * (value_at_cutoff_ + slope_at_cutoff_ * (z - cutoff_));
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
    if (points < 2 || !(hi > lo)) throw std::invalid_argument("uniform_grid: bad range");
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    }
    return grid;
}

namespace {

std::vector<Mark> sampled_marks(const LayeredMeasure& mu, int per_layer,
                                std::uint64_t seed) {
    std::vector<Mark> marks;
    for (const Layer& layer : mu.layers) {
        RngStream stream(seed, 7, static_cast<std::uint64_t>(layer.index));
        for (int i = 0; i < per_layer; ++i) marks.push_back(layer.sample(stream));
    }
    return marks;
}

// integral over the U_2-designated mu1 layers only
double integrate_u2(const ModelSpec& model, const MarkFn& f, double tol) {
    double total = 0.0;
    for (const Layer& layer : model.mu1.layers) {
        if (model.in_u2(layer.index)) total += layer.integrate(f, tol);
    }
    return total;
}

bool has_u2(const ModelSpec& model) {
    for (const Layer& layer : model.mu1.layers) {
        if (model.in_u2(layer.index)) return true;
    }
    return false;
}

}  // namespace

CheckResult check_3a(const ModelSpec& model, int m, const ConcaveModulus& r_m,
                     std::span<const double> x_grid) {
    CheckResult result;
    result.condition = "3a";
    for (double x : x_grid) {
        if (std::abs(x) > m) throw std::invalid_argument("check_3a: grid outside [-m, m]");
    }
    const bool any_u2 = has_u2(model);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        for (std::size_t j = i + 1; j < x_grid.size(); ++j) {
            const double x = x_grid[i], y = x_grid[j];
            double lhs = std::abs(model.b1(x) - model.b1(y));
            if (any_u2) {
                lhs += integrate_u2(
                    model,
                    [&](const Mark& u) {
                        return std::abs(model.g1(x, u) - model.g1(y, u));
                    },
                    1e-9);
            }
            if (!std::isfinite(lhs)) {
                throw std::runtime_error("check_3a: integral not finite at pair");
            }
            const double rhs = r_m(std::abs(x - y)) * (1.0 + 1e-9);
            const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0);
            if (ratio > result.worst_ratio) {
                result.worst_ratio = ratio;
                result.witness_x = x;
                result.witness_y = y;
            }
        }
    }
    result.pass = result.worst_ratio <= 1.0;
    return result;
}

CheckResult check_monotone(const ModelSpec& model, double c,
                           std::span<const double> x_grid, int marks_per_layer,
                           std::uint64_t seed) {
    CheckResult result;
    result.condition = "monotone(c=" + std::to_string(c) + ")";
    const auto marks = sampled_marks(model.mu0, marks_per_layer, seed);
    double worst = 0.0;
    for (const Mark& u : marks) {
        for (std::size_t i = 0; i + 1 < x_grid.size(); ++i) {
            const double x = x_grid[i], xp = x_grid[i + 1];
            if (!(xp > x)) throw std::invalid_argument("check_monotone: grid not increasing");
            const double lo = c * x + model.g0(x, u);
            const double hi = c * xp + model.g0(xp, u);
            const double violation = lo - hi;  // positive means decreasing
            if (violation > worst) {
                worst = violation;
                result.witness_x = x;
                result.witness_y = xp;
            }
        }
    }
    result.worst_ratio = worst;
    result.pass = worst <= 1e-12;
    return result;
}

CheckResult check_3b(const ModelSpec& model, int m, double K_m,
                     std::span<const double> x_grid) {
    CheckResult result;
    result.condition = "3b";
    for (double x : x_grid) {
        if (std::abs(x) > m) throw std::invalid_argument("check_3b: grid outside [-m, m]");
    }
    const int n0 = model.mu0.n_layers();
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        for (std::size_t j = i + 1; j < x_grid.size(); ++j) {
            const double x = x_grid[i], y = x_grid[j];
            const double ds = model.sigma(x) - model.sigma(y);
            double lhs = ds * ds;
            if (n0 > 0) {
                lhs += integrate(
                    model.mu0,
                    [&](const Mark& u) {
                        const double l0 = model.g0(x, u) - model.g0(y, u);
                        return l0 * l0;
                    },
                    n0, 1e-9);
            }
            if (!std::isfinite(lhs)) {
                throw std::runtime_error("check_3b: integral diverged at pair");
            }
            const double rhs = K_m * std::abs(x - y) * (1.0 + 1e-9);
            const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0);
            if (ratio > result.worst_ratio) {
                result.worst_ratio = ratio;
                result.witness_x = x;
                result.witness_y = y;
            }
        }
    }
    result.pass = result.worst_ratio <= 1.0;
    return result;
}

CheckResult check_3c(const ModelSpec& model, int m, double p_m, const MarkFn& f_m,
                     std::span<const double> x_grid, int marks_per_layer,
                     std::uint64_t seed) {
    CheckResult result;
    result.condition = "3c";
    for (double x : x_grid) {
        if (std::abs(x) > m) throw std::invalid_argument("check_3c: grid outside [-m, m]");
    }
    const auto marks = sampled_marks(model.mu0, marks_per_layer, seed);
    for (const Mark& u : marks) {
        const double f = f_m(u);
        if (!(f > 0.0)) {
            result.pass = false;
            result.note = "f_m not strictly positive on a sampled mark";
            return result;
        }
        for (std::size_t i = 0; i < x_grid.size(); ++i) {
            for (std::size_t j = i + 1; j < x_grid.size(); ++j) {
                const double x = x_grid[i], y = x_grid[j];
                const double lhs = std::abs(model.g0(x, u) - model.g0(y, u));
                const double rhs = std::pow(std::abs(x - y), p_m) * f * (1.0 + 1e-9);
                const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0);
                if (ratio > result.worst_ratio) {
                    result.worst_ratio = ratio;
                    result.witness_x = x;
                    result.witness_y = y;
                }
            }
        }
    }
    // integrability of f_m ^ f_m^2: cumulative layer sums must settle down
    const int n0 = model.mu0.n_layers();
    double cumulative = 0.0, last_increment = 0.0;
    for (int n = 1; n <= n0; ++n) {
        last_increment = integrate(
            model.mu0,
            [&](const Mark& u) {
                const double f = f_m(u);
                return std::min(f, f * f);
            },
            n, 1e-9) - cumulative;
        cumulative += last_increment;
        if (!std::isfinite(cumulative)) {
            throw std::runtime_error("check_3c: f_m integral diverged on layer " +
                                     std::to_string(n));
        }
    }
    const bool integrable =
        n0 <= 1 || last_increment <= 0.05 * std::max(cumulative, 1e-12) + 1e-12;
    if (!integrable) {
        result.note = "int (f_m ^ f_m^2) dmu0 shows no numerical convergence";
    }
    result.pass = result.worst_ratio <= 1.0 && integrable;
    return result;
}

CheckResult check_growth(const ModelSpec& model, GrowthKind kind,
                         std::span<const double> x_grid, double K) {
    CheckResult result;
    const int n0 = model.mu0.n_layers();
    const bool any_u2 = has_u2(model);
    auto g0_sq = [&](double x) {
        return n0 == 0 ? 0.0
                       : integrate(
                             model.mu0,
                             [&](const Mark& u) {
                                 const double g = model.g0(x, u);
                                 return g * g;
                             },
                             n0, 1e-9);
    };
    auto g1_abs = [&](double x) {
        return !any_u2 ? 0.0
                       : integrate_u2(
                             model,
                             [&](const Mark& u) { return std::abs(model.g1(x, u)); },
                             1e-9);
    };
    auto g1_sq = [&](double x) {
        return !any_u2 ? 0.0
                       : integrate_u2(
                             model,
                             [&](const Mark& u) {
                                 const double g = model.g1(x, u);
                                 return g * g;
                             },
                             1e-9);
    };
    auto g1_abs_or_sq = [&](double x) {
        return !any_u2 ? 0.0
                       : integrate_u2(
                             model,
                             [&](const Mark& u) {
                                 const double g = std::abs(model.g1(x, u));
                                 return std::max(g, g * g);
                             },
                             1e-9);
    };

    for (double x : x_grid) {
        double lhs = 0.0, rhs = 0.0;
        switch (kind) {
            case GrowthKind::K4a:
                result.condition = "4a";
                lhs = std::abs(model.b(x)) + model.sigma(x) * model.sigma(x) +
                      g0_sq(x) + g1_abs_or_sq(x);
                rhs = K;
                break;
            case GrowthKind::K5a: {
                result.condition = "5a";
                const double j1 = g1_abs(x);
                lhs = model.sigma(x) * model.sigma(x) + g0_sq(x) + g1_sq(x) +
                      model.b(x) * model.b(x) + j1 * j1;
                rhs = K * (1.0 + x * x);
                break;
            }
            case GrowthKind::K6a:
                result.condition = "6a";
                if (x < 0.0) throw std::invalid_argument("check_growth 6a: x >= 0 required");
                lhs = model.b(x) + g1_abs(x);
                rhs = K * (1.0 + x);
                break;
            case GrowthKind::K6b:
                result.condition = "6b";
                if (x < 0.0) throw std::invalid_argument("check_growth 6b: x >= 0 required");
                lhs = model.sigma(x) * model.sigma(x) + g0_sq(x);
                rhs = K * (1.0 + x);  // L(x) from the linear non-decreasing family
                break;
        }
        if (!std::isfinite(lhs)) throw std::runtime_error("check_growth: divergent integral");
        const double ratio = rhs > 0.0 ? lhs / (rhs * (1.0 + 1e-9))
                                       : (lhs > 0.0 ? 1e300 : 0.0);
        if (ratio > result.worst_ratio) {
            result.worst_ratio = ratio;
            result.witness_x = x;
            result.witness_y = x;
        }
    }
    result.pass = result.worst_ratio <= 1.0;
    return result;
}

bool ConditionCertificate::all_passed() const {
    for (const auto& [name, check] : checks) {
        if (!check.pass) return false;
    }
    return true;
}

}  // namespace jsde
