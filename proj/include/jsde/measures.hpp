#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "jsde/rng.hpp"

namespace jsde {

// Mark points live in R^1 or R^2; unused coordinates stay zero. Every mark
// space in this library is a box or a product of a 1-d measure with a
// uniform interval, so two coordinates suffice.
using Mark = std::array<double, 2>;
using MarkFn = std::function<double(const Mark&)>;

constexpr int kMaxMarkDim = 2;

/// Axis-aligned support box; purely descriptive (disjointness checks and
/// diagnostics), never used for sampling.
struct BoxSupport {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};

    bool overlaps(const BoxSupport& other) const;
};

/// One finite-mass piece of a sigma-finite intensity measure.
struct Layer {
    int index = 0;    // 1-based position within the parent measure
    double mass = 0.0;
    BoxSupport support;
    std::function<Mark(RngStream&)> sample;
    std::function<double(const MarkFn&, double)> integrate;  // (f, tol)
};

struct Atom {
    double time = 0.0;
    int layer = 0;
    Mark mark{0.0, 0.0};
};

/// A sigma-finite measure presented as disjoint finite-mass layers. The
/// union of the first n layers is non-decreasing in n; cumulative masses are
/// non-decreasing. tail_bound, when present, integrates an envelope against
/// the part of the measure beyond the first n layers.
class LayeredMeasure {
public:
    int dimension = 1;
    std::vector<Layer> layers;
    std::function<std::optional<double>(int, const MarkFn&)> tail_bound;

    int n_layers() const { return static_cast<int>(layers.size()); }
    double cumulative_mass(int n) const;
    void require_layers(int n) const;  // throws if n exceeds the layer count
};

/// Atoms of a Poisson random measure with intensity dt x mu, restricted to
/// the first n layers. Counts are Poisson(mass * horizon), times uniform on
/// (0, horizon], marks from the layer sampler. Result is sorted by time,
/// ties broken by layer index then draw order.
std::vector<Atom> sample_atoms(const LayeredMeasure& mu, int n_layers,
                               double horizon, RngStream& stream);

/// Atoms of a single layer, in draw order sorted by time.
std::vector<Atom> sample_layer_atoms(const Layer& layer, double horizon,
                                     RngStream& stream);

/// Sum of per-layer integrals of f over the first n layers; each layer is
/// evaluated to quadrature tolerance tol.
double integrate(const LayeredMeasure& mu, const MarkFn& f, int n_layers,
                 double tol);

/// Tail-index functional: computes T(x) = int f 1_{f >= x} dmu on the given
/// decreasing grid, fits the log-log slope s over the smallest decade, and
/// returns 1 - s clamped to [1, 2].
double estimate_alpha(const LayeredMeasure& mu, const MarkFn& f,
                      std::span<const double> x_grid);

// ---------------------------------------------------------------------------
// Built-in layer families
// ---------------------------------------------------------------------------

/// Density scale * u^exponent on [lo1 * 2^(1-n), top), decomposed into a top
/// layer [lo1, top) followed by geometrically shrinking layers
/// [lo1/2^i, lo1/2^(i-1)). Masses are closed-form; a tail_bound integrates
/// envelopes over the remaining (0, lo1 * 2^(1-n)) piece.
LayeredMeasure make_power_law(double exponent, double scale, double lo1,
                              double top, int layer_count);

/// Density scale * exp(-theta u) on [lo, hi) as a single layer; hi may be
/// infinite (theta > 0 in that case).
LayeredMeasure make_exponential(double theta, double scale, double lo, double hi);

/// Finitely many weighted point masses as a single layer.
LayeredMeasure make_point_masses(std::vector<std::pair<double, double>> points);

/// Constant density on a 1-d interval as a single layer.
LayeredMeasure make_uniform_interval(double lo, double hi, double density);

/// Product of each layer of a 1-d measure with Lebesgue measure on
/// (r_lo, r_hi]; the result is 2-dimensional with the r coordinate second.
LayeredMeasure product_with_uniform(const LayeredMeasure& base, double r_lo,
                                    double r_hi);

}  // namespace jsde
