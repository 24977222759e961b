#include "jsde/generator.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace jsde {

TestFunction tf_cos() {
    TestFunction tf;
    tf.name = "cos";
    tf.f = [](double x) { return std::cos(x); };
    tf.f_prime = [](double x) { return -std::sin(x); };
    tf.f_second = [](double x) { return -std::cos(x); };
    tf.f_bound = tf.fp_bound = tf.fpp_bound = 1.0;
    return tf;
}

TestFunction tf_capped_linear(double flat, double width) {
    if (!(flat > 0.0) || !(width > 0.0)) {
        throw std::invalid_argument("capped linear: flat and width must be positive");
    }
    // identity on [-flat, flat], then the slope eases from 1 to 0 through the
    // smoothstep 3t^2 - 2t^3, whose endpoint derivatives vanish (C^2 joins)
    auto value_pos = [flat, width](double x) {
        if (x <= flat) return x;
        const double t = std::min((x - flat) / width, 1.0);
        return flat + width * (t - t * t * t + 0.5 * t * t * t * t);
    };
    auto slope_pos = [flat, width](double x) {
        if (x <= flat) return 1.0;
        if (x >= flat + width) return 0.0;
        const double t = (x - flat) / width;
        return 1.0 - (3.0 * t * t - 2.0 * t * t * t);
    };
    auto curve_pos = [flat, width](double x) {
        if (x <= flat || x >= flat + width) return 0.0;
        const double t = (x - flat) / width;
        return -(6.0 * t - 6.0 * t * t) / width;
    };
    TestFunction tf;
    tf.name = "capped-linear";
    tf.f = [value_pos](double x) {
        return x >= 0.0 ? value_pos(x) : -value_pos(-x);
    };
    tf.f_prime = [slope_pos](double x) { return slope_pos(std::abs(x)); };
    tf.f_second = [curve_pos](double x) {
        return x >= 0.0 ? curve_pos(x) : -curve_pos(-x);
    };
    tf.f_bound = flat + 0.5 * width;
    tf.fp_bound = 1.0;
    tf.fpp_bound = 1.5 / width;
    return tf;
}

TestFunction tf_gaussian_bump() {
    TestFunction tf;
    tf.name = "gaussian-bump";
    tf.f = [](double x) { return std::exp(-0.5 * x * x); };
    tf.f_prime = [](double x) { return -x * std::exp(-0.5 * x * x); };
    tf.f_second = [](double x) { return (x * x - 1.0) * std::exp(-0.5 * x * x); };
    tf.f_bound = 1.0;
    tf.fp_bound = std::exp(-0.5);
    tf.fpp_bound = 1.0;
    return tf;
}

TestFunction test_function_by_name(const std::string& name) {
    if (name == "cos") return tf_cos();
    if (name == "capped-linear") return tf_capped_linear();
    if (name == "gaussian-bump") return tf_gaussian_bump();
    throw std::invalid_argument("unknown test function: " + name);
}

void validate_test_function(const TestFunction& tf) {
    const double step = 1e-4;
    for (int i = -30; i <= 30; ++i) {
        const double x = 0.1 * i + 0.0137;  // offset keeps us off ramp joints
        const double d1 = (tf.f(x + step) - tf.f(x - step)) / (2.0 * step);
        const double d2 = (tf.f_prime(x + step) - tf.f_prime(x - step)) / (2.0 * step);
        if (std::abs(d1 - tf.f_prime(x)) > 1e-5 || std::abs(d2 - tf.f_second(x)) > 1e-5) {
            throw std::invalid_argument("test function '" + tf.name +
                                        "' fails finite-difference consistency at x = " +
                                        std::to_string(x));
        }
        if (std::abs(tf.f(x)) > tf.f_bound * (1.0 + 1e-12) ||
            std::abs(tf.f_prime(x)) > tf.fp_bound * (1.0 + 1e-12) ||
            std::abs(tf.f_second(x)) > tf.fpp_bound * (1.0 + 1e-12)) {
            throw std::invalid_argument("test function '" + tf.name +
                                        "' exceeds its declared bounds");
        }
    }
}

namespace {

// envelope integral over the measure beyond the first n layers: remaining
// declared layers plus the analytic tail bound when available
std::optional<double> tail_integral(const LayeredMeasure& mu, int n,
                                    const MarkFn& envelope) {
    if (mu.tail_bound) return mu.tail_bound(n, envelope);
    if (n >= mu.n_layers()) return 0.0;  // layers exhaust the declared support
    double total = 0.0;
    for (int i = n; i < mu.n_layers(); ++i) {
        total += mu.layers[i].integrate(envelope, 1e-9);
    }
    return total;
}

}  // namespace

GeneratorValue apply_generator(const ModelSpec& model, const TestFunction& tf,
                               double x, const GeneratorTrunc& trunc, double tol) {
    GeneratorValue out;
    const double fp = tf.f_prime(x);
    const double fx = tf.f(x);
    out.value = 0.5 * model.sigma(x) * model.sigma(x) * tf.f_second(x) +
                model.b(x) * fp;

    const double xg = trunc.chi_m ? chi(*trunc.chi_m, x) : x;
    model.mu0.require_layers(trunc.n0);
    for (int i = 0; i < trunc.n0; ++i) {
        out.value += model.mu0.layers[i].integrate(
            [&](const Mark& u) {
                const double z = model.g0(xg, u);
                return tf.f(x + z) - fx - fp * z;
            },
            tol);
    }
    model.mu1.require_layers(trunc.n1);
    for (int i = 0; i < trunc.n1; ++i) {
        const Layer& layer = model.mu1.layers[i];
        if (!model.in_u2(layer.index)) continue;
        out.value += layer.integrate(
            [&](const Mark& u) { return tf.f(x + model.g1(x, u)) - fx; }, tol);
    }

    const auto tail0 = tail_integral(
        model.mu0, trunc.n0, [&](const Mark& u) {
            const double z = model.g0(xg, u);
            return z * z;
        });
    const auto tail1 = tail_integral(
        model.mu1, trunc.n1,
        [&](const Mark& u) { return std::abs(model.g1(x, u)); });
    if (tail0 && tail1) {
        out.tail_bound_available = true;
        out.tail_error_bound = 0.5 * tf.fpp_bound * *tail0 + tf.fp_bound * *tail1;
    }
    return out;
}

namespace {

struct AfCache {
    const ModelSpec& model;
    const TestFunction& tf;
    GeneratorTrunc trunc;
    double tol;
    std::unordered_map<std::uint64_t, double> values;

    double operator()(double x) {
        std::uint64_t key;
        std::memcpy(&key, &x, sizeof(key));
        auto it = values.find(key);
        if (it != values.end()) return it->second;
        const double v = apply_generator(model, tf, x, trunc, tol).value;
        values.emplace(key, v);
        return v;
    }
};

}  // namespace

MartingaleReport martingale_residual(const ModelSpec& model,
                                     const TruncationParams& trunc,
                                     const TestFunction& tf, double x0, double t,
                                     int n_paths, std::uint64_t seed,
                                     int threads) {
    const GeneratorTrunc gt{
        trunc.n0, trunc.n1,
        trunc.truncate_state ? std::optional<double>(trunc.m) : std::nullopt};
    constexpr double kTol = 1e-9;

    auto run_path = [&](int p) {
        const NoiseRealization noise =
            generate_noise(path_seed(seed, p), t, trunc.h, model.mu0, trunc.n0,
                           model.mu1, trunc.n1);
        return simulate(model, trunc, noise, x0, t);
    };

    // residual Z per path, with one Af evaluation per distinct visited state
    auto residual = [&](const Path& path, AfCache& af) {
        double integral = 0.0;
        double prev_t = 0.0;
        double state = path.initial;
        for (const PathEvent& ev : path.events) {
            integral += af(state) * (ev.t - prev_t);
            prev_t = ev.t;
            state = ev.x;
        }
        return tf.f(path.events.empty() ? path.initial : path.events.back().x) -
               tf.f(path.initial) - integral;
    };

    // deterministic state-range probe for the bias budget (first paths only)
    double lo = x0, hi = x0;
    const int probe_paths = std::min(n_paths, 64);
    for (int p = 0; p < probe_paths; ++p) {
        const Path path = run_path(p);
        for (const PathEvent& ev : path.events) {
            lo = std::min(lo, std::min(ev.x_left, ev.x));
            hi = std::max(hi, std::max(ev.x_left, ev.x));
        }
    }
    const double pad = 0.05 * (hi - lo) + 1e-6;
    lo -= pad;
    hi += pad;

    AfCache probe_cache{model, tf, gt, kTol, {}};
    double v_max = 0.0, s_max = 0.0, af_slope = 0.0;
    const int probe_points = 33;
    const double dx = (hi - lo) / (probe_points - 1);
    double prev_af = probe_cache(lo);
    for (int i = 0; i < probe_points; ++i) {
        const double x = lo + i * dx;
        const double xm = trunc.truncate_state ? chi(trunc.m, x) : x;
        v_max = std::max(v_max, std::abs(model.b1(xm) - model.b2(xm) -
                                         model.compensator(xm, trunc.n0)));
        s_max = std::max(s_max, std::abs(model.sigma(xm)));
        if (i > 0) {
            const double af_here = probe_cache(x);
            af_slope = std::max(af_slope, std::abs(af_here - prev_af) / dx);
            prev_af = af_here;
        }
    }

    MartingaleReport report;
    report.n_paths = n_paths;
    report.bias_budget =
        af_slope * (0.5 * v_max * t * trunc.h + s_max * t * std::sqrt(trunc.h));

    const MeanSe stats = mc_mean_se(n_paths, threads, [&](int p) {
        AfCache af{model, tf, gt, kTol, {}};
        const Path path = run_path(p);
        return residual(path, af);
    });
    report.mean = stats.mean;
    report.se = stats.se;
    report.pass = std::abs(report.mean) <= 3.0 * report.se + report.bias_budget;
    return report;
}

}  // namespace jsde
