#include "jsde/noise.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "jsde/stats.hpp"

namespace jsde {

namespace {

constexpr char kMagic[12] = {'J', 'S', 'D', 'E', '-', 'N', 'O', 'I', 'S', 'E', '-', '1'};

// stream component tags
constexpr std::uint64_t kTagBrownian = 0;
constexpr std::uint64_t kTagAtoms0 = 1;
constexpr std::uint64_t kTagAtoms1 = 2;

std::size_t checked_cell_count(double horizon, double h_min) {
    if (!(horizon > 0.0) || !(h_min > 0.0)) {
        throw std::invalid_argument("noise: horizon and h_min must be positive");
    }
    const double ratio = horizon / h_min;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 4.0 * ratio * 1e-16) {
        throw std::invalid_argument("noise: h_min must divide the horizon");
    }
    return static_cast<std::size_t>(rounded);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw std::runtime_error("noise restore: truncated stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::vector<Atom> generate_atoms(std::uint64_t seed, std::uint64_t tag,
                                 const LayeredMeasure& mu, int n, double horizon) {
    mu.require_layers(n);
    std::vector<Atom> all;
    for (int i = 0; i < n; ++i) {
        RngStream stream(seed, tag, static_cast<std::uint64_t>(i + 1));
        auto atoms = sample_layer_atoms(mu.layers[i], horizon, stream);
        all.insert(all.end(), atoms.begin(), atoms.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const Atom& a, const Atom& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.layer < b.layer;
    });
    return all;
}

}  // namespace

double NoiseRealization::total_brownian() const { return pairwise_sum(brownian); }

NoiseRealization generate_noise(std::uint64_t seed, double horizon, double h_min,
                                const LayeredMeasure& mu0, int n0,
                                const LayeredMeasure& mu1, int n1) {
    const std::size_t cells = checked_cell_count(horizon, h_min);
    NoiseRealization noise;
    noise.seed = seed;
    noise.horizon = horizon;
    noise.h_min = h_min;
    noise.n_layers0 = n0;
    noise.n_layers1 = n1;
    noise.mark_dim0 = mu0.dimension;
    noise.mark_dim1 = mu1.dimension;

    RngStream brownian_stream(seed, kTagBrownian, 0);
    noise.brownian.resize(cells);
    const double scale = std::sqrt(h_min);
    for (std::size_t i = 0; i < cells; ++i) {
        noise.brownian[i] = scale * brownian_stream.normal();
    }
    noise.atoms0 = generate_atoms(seed, kTagAtoms0, mu0, n0, horizon);
    noise.atoms1 = generate_atoms(seed, kTagAtoms1, mu1, n1, horizon);
    return noise;
}

NoiseRealization coarsen(const NoiseRealization& noise, int factor) {
    if (factor < 1 || (factor & (factor - 1)) != 0) {
        throw std::invalid_argument("coarsen: factor must be a power of two");
    }
    if (factor == 1) return noise;
    if (noise.brownian.size() % static_cast<std::size_t>(factor) != 0) {
        throw std::invalid_argument("coarsen: factor does not divide the cell count");
    }
    NoiseRealization coarse = noise;
    coarse.h_min = noise.h_min * factor;
    const std::size_t blocks = noise.brownian.size() / factor;
    coarse.brownian.resize(blocks);
    std::span<const double> fine(noise.brownian);
    for (std::size_t b = 0; b < blocks; ++b) {
        coarse.brownian[b] = pairwise_sum(fine.subspan(b * factor, factor));
    }
    return coarse;
}

void dump_noise(const NoiseRealization& noise, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, noise.seed);
    write_f64(out, noise.horizon);
    write_f64(out, noise.h_min);
    write_u64(out, static_cast<std::uint64_t>(noise.n_layers0));
    write_u64(out, static_cast<std::uint64_t>(noise.n_layers1));
    write_u64(out, static_cast<std::uint64_t>(noise.mark_dim0));
    write_u64(out, static_cast<std::uint64_t>(noise.mark_dim1));
    write_u64(out, noise.brownian.size());
    for (double v : noise.brownian) write_f64(out, v);
    for (const auto* atoms : {&noise.atoms0, &noise.atoms1}) {
        const int dim = (atoms == &noise.atoms0) ? noise.mark_dim0 : noise.mark_dim1;
        write_u64(out, atoms->size());
        for (const Atom& atom : *atoms) {
            write_f64(out, atom.time);
            write_u64(out, static_cast<std::uint64_t>(atom.layer));
            for (int d = 0; d < dim; ++d) write_f64(out, atom.mark[d]);
        }
    }
    if (!out) throw std::runtime_error("noise dump: write failed");
}

NoiseRealization restore_noise(std::istream& in) {
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("noise restore: bad magic header");
    }
    NoiseRealization noise;
    noise.seed = read_u64(in);
    noise.horizon = read_f64(in);
    noise.h_min = read_f64(in);
    noise.n_layers0 = static_cast<int>(read_u64(in));
    noise.n_layers1 = static_cast<int>(read_u64(in));
    noise.mark_dim0 = static_cast<int>(read_u64(in));
    noise.mark_dim1 = static_cast<int>(read_u64(in));
    if (noise.mark_dim0 > kMaxMarkDim || noise.mark_dim1 > kMaxMarkDim) {
        throw std::runtime_error("noise restore: unsupported mark dimension");
    }
    const std::uint64_t cells = read_u64(in);
    noise.brownian.resize(cells);
    for (auto& v : noise.brownian) v = read_f64(in);
    for (auto* atoms : {&noise.atoms0, &noise.atoms1}) {
        const int dim = (atoms == &noise.atoms0) ? noise.mark_dim0 : noise.mark_dim1;
        const std::uint64_t count = read_u64(in);
        atoms->resize(count);
        for (Atom& atom : *atoms) {
            atom.time = read_f64(in);
            atom.layer = static_cast<int>(read_u64(in));
            for (int d = 0; d < dim; ++d) atom.mark[d] = read_f64(in);
        }
    }
    return noise;
}

}  // namespace jsde
