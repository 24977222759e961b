#include "jsde/models.hpp"

#include <cmath>
#include <stdexcept>

#include "jsde/quadrature.hpp"

namespace jsde {

double h_alpha_fn(double alpha, double x) {
    if (x <= 0.0) return 0.0;
    return std::pow(x, alpha) / (1.0 - alpha);
}

double counterexample_phi(double alpha, double x) {
    if (x < 0.0 || x > 1.0) return 0.0;
    const double left = std::pow(std::abs(x), alpha);
    const double right = std::pow(std::abs(x - 1.0), alpha);
    return std::min(left, right) / (1.0 - alpha);
}

double bl_q(double x, double r) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return (r <= x ? 1.0 : 0.0) - x;
}

double db_g(double x, double u, double r) {
    if (x <= 0.0 || r * x > 1.0) return 0.0;
    return x * std::expm1(-u);  // -x (1 - e^-u)
}

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("model: alpha must lie in (0, 1)");
    }
}

ModelSpec zero_coefficient_base(const std::string& name) {
    ModelSpec spec;
    spec.name = name;
    spec.sigma = [](double) { return 0.0; };
    spec.b1 = [](double) { return 0.0; };
    spec.b2 = [](double) { return 0.0; };
    spec.g0 = [](double, const Mark&) { return 0.0; };
    spec.g1 = [](double, const Mark&) { return 0.0; };
    return spec;
}

// single compensated atom stream: dx = phi(x-) dN~(t)
BuiltModel single_atom_model(const std::string& name, double lambda,
                             std::function<double(double)> phi) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("model: lambda must be >= 0");
    BuiltModel model;
    model.spec = zero_coefficient_base(name);
    model.spec.mu0 = make_point_masses({{1.0, lambda}});
    model.spec.g0 = [phi](double x, const Mark&) { return phi(x); };
    model.spec.compensator0 = [phi, lambda](double x, int n) {
        return n >= 1 ? lambda * phi(x) : 0.0;
    };
    return model;
}

}  // namespace

BuiltModel model_h_alpha(double alpha, double lambda) {
    require_alpha(alpha);
    BuiltModel model = single_atom_model(
        "h_alpha", lambda, [alpha](double x) { return h_alpha_fn(alpha, x); });

    const double inv = 1.0 / (1.0 - alpha);
    OdeSolution x2;
    x2.name = "x2_power";
    x2.y = [inv](double t) { return std::pow(t, inv); };
    x2.y_prime = [alpha, inv](double t) {
        return t <= 0.0 ? 0.0 : inv * std::pow(t, alpha * inv);
    };
    x2.t_lo = 0.0;
    x2.t_hi = 2.0;
    x2.sign = -1;  // solves dx = +h_alpha(x) dt
    OdeSolution x1;
    x1.name = "x1_zero";
    x1.y = [](double) { return 0.0; };
    x1.y_prime = [](double) { return 0.0; };
    x1.t_lo = 0.0;
    x1.t_hi = 2.0;
    x1.sign = -1;
    model.facts.ode_solutions = {x1, x2};
    return model;
}

BuiltModel model_counterexample(double alpha, double lambda) {
    require_alpha(alpha);
    BuiltModel model = single_atom_model(
        "counterexample", lambda,
        [alpha](double x) { return counterexample_phi(alpha, x); });

    const double inv = 1.0 / (1.0 - alpha);
    const double t_mid = std::pow(2.0, alpha - 1.0);
    const double t_end = std::pow(2.0, alpha);
    OdeSolution y1;
    y1.name = "y1_const";
    y1.y = [](double) { return 1.0; };
    y1.y_prime = [](double) { return 0.0; };
    y1.t_lo = 0.0;
    y1.t_hi = 2.0 * t_end;
    y1.sign = +1;  // solves dx = -phi(x) dt
    OdeSolution y2;
    y2.name = "y2_escape";
    y2.y = [inv, t_mid, t_end](double t) {
        if (t < t_mid) return 1.0 - std::pow(t, inv);
        if (t < t_end) return std::pow(t_end - t, inv);
        return 0.0;
    };
    y2.y_prime = [alpha, inv, t_mid, t_end](double t) {
        if (t <= 0.0) return 0.0;
        if (t < t_mid) return -inv * std::pow(t, alpha * inv);
        if (t < t_end) return -inv * std::pow(t_end - t, alpha * inv);
        return 0.0;
    };
    y2.kinks = {t_mid, t_end};
    y2.t_lo = 0.0;
    y2.t_hi = 2.0 * t_end;
    y2.sign = +1;
    model.facts.ode_solutions = {y1, y2};
    return model;
}

BuiltModel model_bertoin_legall(const LayeredMeasure& nu) {
    if (nu.dimension != 1) {
        throw std::invalid_argument("bertoin_legall: nu must be one-dimensional");
    }
    const double z_sq_moment = integrate(
        nu, [](const Mark& m) { return m[0] * m[0]; }, nu.n_layers(), 1e-10);
    if (!std::isfinite(z_sq_moment)) {
        throw std::invalid_argument("bertoin_legall: nu lacks a finite z^2 moment");
    }

    BuiltModel model;
    model.spec = zero_coefficient_base("bertoin_legall");
    model.spec.mu0 = product_with_uniform(nu, 0.0, 1.0);
    model.spec.g0 = [](double x, const Mark& m) { return m[0] * bl_q(x, m[1]); };
    // q integrates to zero in r for every x and z, so each layer's
    // compensator vanishes identically
    model.spec.compensator0 = [](double, int) { return 0.0; };
    // post-jump map z 1_{r<=x} + (1-z) x, fused so the image stays in [0,1]
    // to the last bit
    model.spec.jump_map0 = [](double x, const Mark& m) {
        if (x <= 0.0 || x >= 1.0) return x;
        const double z = m[0], r = m[1];
        const double keep = 1.0 - z;
        return r <= x ? std::fma(keep, x, z) : keep * x;
    };
    model.spec.domain = Domain::NonNegative;

    model.facts.invariant_interval = {{0.0, 1.0}};
    PairIdentity identity;
    identity.name = "corollary_6_2";
    identity.closed_form = [z_sq_moment](double x, double y) {
        const double d = x - y;
        return (std::abs(d) - d * d) * z_sq_moment;
    };
    identity.quadrature = [nu](double x, double y) {
        double total = 0.0;
        const std::array<double, 2> breaks{std::min(x, y), std::max(x, y)};
        for (const Layer& layer : nu.layers) {
            total += layer.integrate(
                [&](const Mark& zm) {
                    const double z = zm[0];
                    return integrate_gk_pieces(
                        [&](double r) {
                            const double diff = z * bl_q(x, r) - z * bl_q(y, r);
                            return diff * diff;
                        },
                        0.0, 1.0, breaks, 1e-10);
                },
                1e-10);
        }
        return total;
    };
    identity.tol = 1e-6;
    model.facts.identity_checks.push_back(identity);
    return model;
}

BuiltModel model_doering_barczy(const LayeredMeasure& mu, double r_max) {
    if (mu.dimension != 1) {
        throw std::invalid_argument("doering_barczy: mu must be one-dimensional");
    }
    if (!(r_max > 0.0)) throw std::invalid_argument("doering_barczy: r_max must be positive");
    const double small_moment = integrate(
        mu, [](const Mark& m) { return std::min(1.0, m[0] * m[0]); }, mu.n_layers(),
        1e-10);
    if (!std::isfinite(small_moment)) {
        throw std::invalid_argument("doering_barczy: (1 ^ u^2) mu(du) must be finite");
    }

    // cumulative int (1 - e^-u) over the first n layers; the compensator is
    // exact per retained layer count
    std::vector<double> e1_cum{0.0};
    for (int n = 1; n <= mu.n_layers(); ++n) {
        const double layer_e1 = mu.layers[n - 1].integrate(
            [](const Mark& m) { return -std::expm1(-m[0]); }, 1e-10);
        e1_cum.push_back(e1_cum.back() + layer_e1);
    }
    const double e2 = integrate(
        mu,
        [](const Mark& m) {
            const double v = -std::expm1(-m[0]);
            return v * v;
        },
        mu.n_layers(), 1e-10);

    BuiltModel model;
    model.spec = zero_coefficient_base("doering_barczy");
    model.spec.mu0 = product_with_uniform(mu, 0.0, r_max);
    model.spec.g0 = [](double x, const Mark& m) { return db_g(x, m[0], m[1]); };
    model.spec.compensator0 = [e1_cum, r_max](double x, int n) {
        if (x <= 0.0) return 0.0;
        const std::size_t idx = std::min<std::size_t>(n, e1_cum.size() - 1);
        return -e1_cum[idx] * std::min(r_max * x, 1.0);
    };
    model.spec.jump_map0 = [](double x, const Mark& m) {
        if (x <= 0.0 || m[1] * x > 1.0) return x;
        return x * std::exp(-m[0]);
    };
    model.spec.domain = Domain::NonNegative;

    model.facts.r_max = r_max;
    // per-layer compensator increments must settle for the truncation to be
    // meaningful; measures with divergent (1-e^-u)-integral get flagged
    if (mu.n_layers() > 1) {
        const double last = e1_cum.back() - e1_cum[e1_cum.size() - 2];
        model.facts.compensator_series_converged =
            last <= 0.05 * std::max(e1_cum.back(), 1e-12) + 1e-12;
    }

    PairIdentity identity;
    identity.name = "corollary_6_3";
    identity.closed_form = [e2](double x, double y) { return std::abs(x - y) * e2; };
    identity.quadrature = [mu](double x, double y) {
        if (!(x > 0.0) || !(y > 0.0)) {
            throw std::invalid_argument("corollary_6_3: needs x, y > 0");
        }
        const double r_hi = 1.0 / std::min(x, y);  // integrand vanishes beyond
        const std::array<double, 2> breaks{1.0 / std::max(x, y), r_hi};
        return integrate_gk_pieces(
            [&](double r) {
                double inner = 0.0;
                for (const Layer& layer : mu.layers) {
                    inner += layer.integrate(
                        [&](const Mark& um) {
                            const double diff =
                                db_g(x, um[0], r) - db_g(y, um[0], r);
                            return diff * diff;
                        },
                        1e-10);
                }
                return inner;
            },
            0.0, r_hi, breaks, 1e-9);
    };
    identity.tol = 1e-6;
    model.facts.identity_checks.push_back(identity);
    return model;
}

double ode_residual(const std::function<double(double)>& phi,
                    const OdeSolution& sol, std::span<const double> grid) {
    double worst = 0.0;
    for (double t : grid) {
        if (t < sol.t_lo || t > sol.t_hi) continue;
        bool near_kink = false;
        for (double kink : sol.kinks) {
            if (std::abs(t - kink) < 1e-6) near_kink = true;
        }
        if (near_kink) continue;
        double deriv;
        if (sol.y_prime) {
            deriv = sol.y_prime(t);
        } else {
            const double step = 1e-6;
            deriv = (sol.y(t + step) - sol.y(t - step)) / (2.0 * step);
        }
        const double target = static_cast<double>(sol.sign) * (-phi(sol.y(t)));
        worst = std::max(worst, std::abs(deriv - target));
    }
    return worst;
}

}  // namespace jsde
