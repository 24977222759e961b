#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jsde/measures.hpp"
#include "jsde/noise.hpp"

namespace jsde {

enum class Domain { FullLine, NonNegative };

/// Coefficient quadruple (sigma, b = b1 - b2, g0, g1) with its two layered
/// measures and the U_2 selection. g0 drives the compensated integral, g1 the
/// uncompensated one. jump_map0, when present, must equal x + g0(x, u) and is
/// used by the simulator so that structurally exact jump maps (for example
/// x -> z + (1-z)x) preserve interval invariants bit-exactly.
struct ModelSpec {
    std::string name;
    std::function<double(double)> sigma;
    std::function<double(double)> b1;
    std::function<double(double)> b2;
    std::function<double(double, const Mark&)> g0;
    std::function<double(double, const Mark&)> g1;
    LayeredMeasure mu0;
    LayeredMeasure mu1;
    std::vector<int> u2_layers;  // mu1 layer indices forming U_2
    std::function<double(double, int)> compensator0;  // optional closed form (x, n)
    std::function<double(double, const Mark&)> jump_map0;  // optional exact x + g0
    Domain domain = Domain::FullLine;

    double b(double x) const { return b1(x) - b2(x); }
    bool in_u2(int layer) const;
    /// Compensator of the first n retained mu0 layers at state x: closed form
    /// when declared, layerwise quadrature otherwise.
    double compensator(double x, int n, double tol = 1e-9) const;
};

/// Registration-time sanity checks: b2 non-decreasing on a probe grid and,
/// for non-negative-domain models, the boundary assumptions (b >= 0 and
/// sigma = 0 for x <= 0, g0 = 0 for x <= 0, jumps preserve positivity).
/// Throws std::invalid_argument on violation.
void check_registration(const ModelSpec& model, std::uint64_t probe_seed = 12345);

/// Truncation levels of the approximating equation: chi_m radius, retained
/// layer counts, base grid step, and the optional clamps.
struct TruncationParams {
    double m = 1e6;
    int n0 = 0;
    int n1 = 0;
    double h = 0.0625;
    bool truncate_g1 = true;
    bool truncate_state = true;
};

/// Clamp of x to [-m, m].
double chi(double m, double x);

struct PathEvent {
    double t;
    double x_left;  // value just before the event
    double x;       // value after (differs from x_left only at jumps)
};

/// A cadlag numerical solution: initial value plus every timeline event
/// (grid point or atom) with pre- and post-jump values.
struct Path {
    double initial = 0.0;
    double horizon = 0.0;
    std::vector<PathEvent> events;

    double final_value() const { return events.empty() ? initial : events.back().x; }
    double min_value() const;
    double max_abs() const;
};

/// Jump-adapted Euler scheme for the truncated equation against a fixed
/// noise realization. The event timeline is the union of the grid {ih} and
/// the atom times of the retained layers. Between events the state moves by
/// [b1 - b2 - compensator](chi_m(x)) dt + sigma(chi_m(x)) dB, where dB sums
/// the Brownian cells whose right endpoint falls in the gap; at a mu0 atom
/// the jump is g0(chi_m(x-), u), at a mu1 atom g1(chi_m(x-), u), clamped by
/// chi_m when truncate_g1 is set.
Path simulate(const ModelSpec& model, const TruncationParams& trunc,
              const NoiseRealization& noise, double x0, double horizon);

struct EnsembleStats {
    std::vector<double> t_grid;
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<double> min;
    std::vector<double> max;
    std::vector<double> se;
    double sup_sq_mean = 0.0;  // mean of 1 + sup_t x(t)^2
    double sup_sq_se = 0.0;
    double min_over_paths = 0.0;
    int n_paths = 0;
};

/// Monte Carlo ensemble with independent per-path noise (stream key
/// (seed, path)). Statistics are accumulated per fixed 64-path block and the
/// blocks combined pairwise in index order, so results do not depend on the
/// thread count.
EnsembleStats simulate_ensemble(const ModelSpec& model,
                                const TruncationParams& trunc,
                                std::uint64_t seed, double x0, double horizon,
                                int n_paths, int threads = 1);

struct UniquenessRow {
    double h;
    double sup_diff;  // against the next finer level at common event times
};

/// Couples one noise realization (generated at the finest level) across the
/// given decreasing dyadic step sizes and reports the sup difference between
/// consecutive refinements.
std::vector<UniquenessRow> uniqueness_experiment(const ModelSpec& model,
                                                 const TruncationParams& trunc,
                                                 std::uint64_t seed, double x0,
                                                 double horizon,
                                                 std::span<const double> levels);

struct MomentReport {
    double estimate = 0.0;  // MC estimate of E[1 + sup_t x(t)^2]
    double se = 0.0;
    double bound = 0.0;     // (1 + 6 x0^2) exp(6K(4+T)T)
    double K = 0.0;
    bool pass = false;      // estimate + 3 se <= bound
};

MomentReport moment_check(const ModelSpec& model, const TruncationParams& trunc,
                          std::uint64_t seed, double x0, double horizon,
                          int n_paths, double K, int threads = 1);

/// Derives the per-path noise seed from the ensemble seed; exposed so tests
/// can reproduce individual paths.
std::uint64_t path_seed(std::uint64_t seed, int path_index);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

/// Mean and standard error of sample(i) over i in [0, n). Samples are
/// accumulated in fixed 64-item blocks combined pairwise in index order, so
/// the result is independent of the thread count.
MeanSe mc_mean_se(int n, int threads, const std::function<double(int)>& sample);

}  // namespace jsde
