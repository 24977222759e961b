#include "jsde/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "jsde/quadrature.hpp"
#include "jsde/stats.hpp"

namespace jsde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool BoxSupport::overlaps(const BoxSupport& other) const {
    if (dim != other.dim) return false;
    for (int d = 0; d < dim; ++d) {
        if (hi[d] <= other.lo[d] || other.hi[d] <= lo[d]) return false;
    }
    return true;
}

double LayeredMeasure::cumulative_mass(int n) const {
    require_layers(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += layers[i].mass;
    return total;
}

void LayeredMeasure::require_layers(int n) const {
    if (n < 0 || n > n_layers()) {
        throw std::invalid_argument("layered measure: requested layer " +
                                    std::to_string(n) + " of " +
                                    std::to_string(n_layers()));
    }
}

std::vector<Atom> sample_layer_atoms(const Layer& layer, double horizon,
                                     RngStream& stream) {
    const std::uint64_t count = stream.poisson(layer.mass * horizon);
    std::vector<Atom> atoms;
    atoms.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Atom atom;
        atom.time = horizon * stream.uniform_pos();  // (0, horizon]
        atom.layer = layer.index;
        atom.mark = layer.sample(stream);
        atoms.push_back(atom);
    }
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const Atom& a, const Atom& b) { return a.time < b.time; });
    return atoms;
}

std::vector<Atom> sample_atoms(const LayeredMeasure& mu, int n_layers,
                               double horizon, RngStream& stream) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_atoms: horizon must be positive");
    if (n_layers < 1) throw std::invalid_argument("sample_atoms: need at least one layer");
    mu.require_layers(n_layers);
    std::vector<Atom> all;
    for (int i = 0; i < n_layers; ++i) {
        auto atoms = sample_layer_atoms(mu.layers[i], horizon, stream);
        all.insert(all.end(), atoms.begin(), atoms.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const Atom& a, const Atom& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.layer < b.layer;
    });
    return all;
}

double integrate(const LayeredMeasure& mu, const MarkFn& f, int n_layers,
                 double tol) {
    mu.require_layers(n_layers);
    double total = 0.0;
    for (int i = 0; i < n_layers; ++i) {
        try {
            total += mu.layers[i].integrate(f, tol);
        } catch (const QuadratureError& e) {
            throw QuadratureError("layer " + std::to_string(mu.layers[i].index) +
                                  ": " + e.what());
        }
    }
    return total;
}

double estimate_alpha(const LayeredMeasure& mu, const MarkFn& f,
                      std::span<const double> x_grid) {
    if (x_grid.size() < 4) throw std::invalid_argument("estimate_alpha: grid too short");
    for (std::size_t i = 0; i + 1 < x_grid.size(); ++i) {
        if (!(x_grid[i] > x_grid[i + 1]) || !(x_grid[i + 1] > 0.0)) {
            throw std::invalid_argument("estimate_alpha: grid must be positive decreasing");
        }
    }
    const double x_max = x_grid.front();
    const double x_min = x_grid.back();
    if (!(x_max / x_min >= 100.0)) {
        throw std::invalid_argument("estimate_alpha: grid must span at least two decades");
    }

    std::vector<double> tail(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double threshold = x_grid[i];
        tail[i] = integrate(
            mu, [&](const Mark& u) { return f(u) >= threshold ? f(u) : 0.0; },
            mu.n_layers(), 1e-9);
        if (!std::isfinite(tail[i])) {
            throw std::runtime_error("estimate_alpha: tail integral not finite at x = " +
                                     std::to_string(threshold));
        }
    }

    // The limit in the tail index is at x -> 0+, so fit only over the
    // smallest decade of the grid.
    std::vector<double> lx, lt;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        if (x_grid[i] <= 10.0 * x_min) {
            if (!(tail[i] > 0.0)) {
                throw std::runtime_error("estimate_alpha: tail integral vanished near 0");
            }
            lx.push_back(std::log(x_grid[i]));
            lt.push_back(std::log(tail[i]));
        }
    }
    if (lx.size() < 2) throw std::invalid_argument("estimate_alpha: grid too short near 0");
    const double slope = ls_slope(lx, lt);
    return std::clamp(1.0 - slope, 1.0, 2.0);
}

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

namespace {

// mass of density scale * u^p over [a, b)
double power_mass(double p, double scale, double a, double b) {
    if (p == -1.0) {
        if (b == kInf) throw std::invalid_argument("power law: infinite mass layer");
        return scale * std::log(b / a);
    }
    const double q = p + 1.0;
    if (b == kInf) {
        if (q >= 0.0) throw std::invalid_argument("power law: infinite mass layer");
        return -scale * std::pow(a, q) / q;
    }
    return scale * (std::pow(b, q) - std::pow(a, q)) / q;
}

Layer power_layer(int index, double p, double scale, double a, double b) {
    Layer layer;
    layer.index = index;
    layer.mass = power_mass(p, scale, a, b);
    layer.support = BoxSupport{1, {a, 0.0}, {b, 0.0}};
    const double q = p + 1.0;
    layer.sample = [p, q, a, b](RngStream& rng) -> Mark {
        const double v = rng.uniform();
        double u;
        if (p == -1.0) {
            u = a * std::pow(b / a, v);
        } else if (b == kInf) {
            // q < 0 here; survival inversion over [a, inf)
            u = a * std::pow(1.0 - v, 1.0 / q);
        } else {
            const double aq = std::pow(a, q), bq = std::pow(b, q);
            u = std::pow(aq + v * (bq - aq), 1.0 / q);
        }
        return Mark{u, 0.0};
    };
    layer.integrate = [p, scale, a, b](const MarkFn& f, double tol) {
        return integrate_gk(
            [&](double u) { return f(Mark{u, 0.0}) * scale * std::pow(u, p); }, a, b,
            tol);
    };
    return layer;
}

}  // namespace

LayeredMeasure make_power_law(double exponent, double scale, double lo1,
                              double top, int layer_count) {
    if (!(lo1 > 0.0) || !(top > lo1) || layer_count < 1 || !(scale > 0.0)) {
        throw std::invalid_argument("make_power_law: bad parameters");
    }
    LayeredMeasure mu;
    mu.dimension = 1;
    mu.layers.push_back(power_layer(1, exponent, scale, lo1, top));
    double hi = lo1;
    for (int i = 2; i <= layer_count; ++i) {
        const double lo = hi / 2.0;
        mu.layers.push_back(power_layer(i, exponent, scale, lo, hi));
        hi = lo;
    }
    const double p = exponent;
    mu.tail_bound = [p, scale, lo1, layer_count](
                        int n, const MarkFn& envelope) -> std::optional<double> {
        if (n >= layer_count) n = layer_count;
        const double edge = lo1 * std::pow(2.0, 1.0 - n);
        // integrate envelope * density over (0, edge) in log coordinates;
        // 80 e-folds below the edge is beyond double precision for any
        // integrable envelope
        const double t_hi = std::log(edge);
        const double value = integrate_gk(
            [&](double t) {
                const double u = std::exp(t);
                return envelope(Mark{u, 0.0}) * scale * std::pow(u, p + 1.0);
            },
            t_hi - 80.0, t_hi, 1e-10);
        return value;
    };
    return mu;
}

LayeredMeasure make_exponential(double theta, double scale, double lo, double hi) {
    if (!(scale > 0.0) || !(lo >= 0.0) || !(hi > lo)) {
        throw std::invalid_argument("make_exponential: bad parameters");
    }
    if (hi == kInf && !(theta > 0.0)) {
        throw std::invalid_argument("make_exponential: infinite range needs theta > 0");
    }
    Layer layer;
    layer.index = 1;
    if (theta == 0.0) {
        layer.mass = scale * (hi - lo);
    } else {
        const double upper = (hi == kInf) ? 0.0 : std::exp(-theta * hi);
        layer.mass = scale / theta * (std::exp(-theta * lo) - upper);
    }
    layer.support = BoxSupport{1, {lo, 0.0}, {hi, 0.0}};
    layer.sample = [theta, lo, hi](RngStream& rng) -> Mark {
        const double v = rng.uniform();
        double u;
        if (theta == 0.0) {
            u = lo + v * (hi - lo);
        } else {
            const double slo = std::exp(-theta * lo);
            const double shi = (hi == kInf) ? 0.0 : std::exp(-theta * hi);
            u = -std::log(slo - v * (slo - shi)) / theta;
        }
        return Mark{u, 0.0};
    };
    layer.integrate = [theta, scale, lo, hi](const MarkFn& f, double tol) {
        return integrate_gk(
            [&](double u) { return f(Mark{u, 0.0}) * scale * std::exp(-theta * u); },
            lo, hi, tol);
    };
    LayeredMeasure mu;
    mu.dimension = 1;
    mu.layers.push_back(std::move(layer));
    return mu;
}

LayeredMeasure make_point_masses(std::vector<std::pair<double, double>> points) {
    if (points.empty()) throw std::invalid_argument("make_point_masses: no points");
    double total = 0.0;
    double lo = kInf, hi = -kInf;
    for (const auto& [u, w] : points) {
        if (!(w >= 0.0)) throw std::invalid_argument("make_point_masses: negative weight");
        total += w;
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    Layer layer;
    layer.index = 1;
    layer.mass = total;
    layer.support = BoxSupport{1, {lo, 0.0}, {std::nextafter(hi, kInf), 0.0}};
    layer.sample = [points, total](RngStream& rng) -> Mark {
        double target = rng.uniform() * total;
        for (const auto& [u, w] : points) {
            target -= w;
            if (target < 0.0) return Mark{u, 0.0};
        }
        return Mark{points.back().first, 0.0};
    };
    layer.integrate = [points](const MarkFn& f, double) {
        double sum = 0.0;
        for (const auto& [u, w] : points) sum += w * f(Mark{u, 0.0});
        return sum;
    };
    LayeredMeasure mu;
    mu.dimension = 1;
    mu.layers.push_back(std::move(layer));
    return mu;
}

LayeredMeasure make_uniform_interval(double lo, double hi, double density) {
    if (!(hi > lo) || !(density > 0.0)) {
        throw std::invalid_argument("make_uniform_interval: bad parameters");
    }
    Layer layer;
    layer.index = 1;
    layer.mass = density * (hi - lo);
    layer.support = BoxSupport{1, {lo, 0.0}, {hi, 0.0}};
    layer.sample = [lo, hi](RngStream& rng) -> Mark {
        return Mark{lo + rng.uniform() * (hi - lo), 0.0};
    };
    layer.integrate = [lo, hi, density](const MarkFn& f, double tol) {
        return integrate_gk([&](double u) { return f(Mark{u, 0.0}) * density; }, lo,
                            hi, tol);
    };
    LayeredMeasure mu;
    mu.dimension = 1;
    mu.layers.push_back(std::move(layer));
    return mu;
}

LayeredMeasure product_with_uniform(const LayeredMeasure& base, double r_lo,
                                    double r_hi) {
    if (base.dimension != 1) {
        throw std::invalid_argument("product_with_uniform: base must be 1-d");
    }
    if (!(r_hi > r_lo)) throw std::invalid_argument("product_with_uniform: empty interval");
    LayeredMeasure mu;
    mu.dimension = 2;
    const double width = r_hi - r_lo;
    for (const Layer& b : base.layers) {
        Layer layer;
        layer.index = b.index;
        layer.mass = b.mass * width;
        layer.support = BoxSupport{2, {b.support.lo[0], r_lo}, {b.support.hi[0], r_hi}};
        layer.sample = [b, r_lo, width](RngStream& rng) -> Mark {
            Mark m = b.sample(rng);
            m[1] = r_lo + width * rng.uniform_pos();  // (r_lo, r_hi]
            return m;
        };
        layer.integrate = [b, r_lo, r_hi](const MarkFn& f, double tol) {
            return b.integrate(
                [&](const Mark& u) {
                    return integrate_gk(
                        [&](double r) { return f(Mark{u[0], r}); }, r_lo, r_hi,
                        tol * 0.1);
                },
                tol);
        };
        mu.layers.push_back(std::move(layer));
    }
    if (base.tail_bound) {
        auto base_tail = base.tail_bound;
        mu.tail_bound = [base_tail, r_lo, r_hi](
                            int n, const MarkFn& envelope) -> std::optional<double> {
            // envelope integrated over the tail layers, r handled by quadrature
            return base_tail(n, [&](const Mark& u) {
                return integrate_gk([&](double r) { return envelope(Mark{u[0], r}); },
                                    r_lo, r_hi, 1e-10);
            });
        };
    }
    return mu;
}

}  // namespace jsde
