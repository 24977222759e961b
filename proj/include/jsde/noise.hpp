#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "jsde/measures.hpp"

namespace jsde {

/// One realization of the driving noise: Brownian increments at the finest
/// resolution plus the marked Poisson atoms of both drivers. Immutable after
/// generation; many simulations may read the same realization, which is what
/// couples them.
struct NoiseRealization {
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double h_min = 0.0;
    std::vector<double> brownian;  // increments, N(0, h_min), one per cell
    std::vector<Atom> atoms0;      // compensated driver, sorted by time
    std::vector<Atom> atoms1;      // uncompensated driver, sorted by time
    int n_layers0 = 0;
    int n_layers1 = 0;
    int mark_dim0 = 1;
    int mark_dim1 = 1;

    std::size_t n_cells() const { return brownian.size(); }
    /// Total Brownian displacement over the horizon (pairwise summation, so
    /// it is bit-identical before and after coarsening).
    double total_brownian() const;
};

/// Deterministic function of all arguments. Brownian increments and each
/// layer's atoms come from independent sub-streams keyed by
/// (seed, component, layer), so requesting more layers never perturbs the
/// existing ones.
NoiseRealization generate_noise(std::uint64_t seed, double horizon, double h_min,
                                const LayeredMeasure& mu0, int n0,
                                const LayeredMeasure& mu1, int n1);

/// Aggregates Brownian increments in blocks of `factor` (a power of two that
/// divides the cell count); atoms are unchanged. Blocks are summed pairwise,
/// which makes coarsen(coarsen(x, 2), 2) bit-identical to coarsen(x, 4).
NoiseRealization coarsen(const NoiseRealization& noise, int factor);

/// Binary dump/restore. Little-endian 64-bit floats, counts as 64-bit
/// unsigned, magic header "JSDE-NOISE-1". Round-trips bit-exactly.
void dump_noise(const NoiseRealization& noise, std::ostream& out);
NoiseRealization restore_noise(std::istream& in);

}  // namespace jsde
