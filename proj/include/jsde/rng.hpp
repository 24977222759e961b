#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace jsde {

// Mixes a 64-bit word; used both as a stand-alone hash step and to expand
// seeds into generator state.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream (xoshiro256++) with explicit sub-stream keying.
///
/// Streams derived from the same seed but different (tag, index) keys are
/// statistically independent, so adding a layer or a path never perturbs the
/// draws of the existing ones. All samplers below are implemented in terms of
/// the raw 64-bit output, which keeps results identical across platforms with
/// the same libm.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) { seed_from(seed, 0, 0); }

    RngStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
        seed_from(seed, tag, index);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; never returns zero (safe under log).
    double uniform_pos() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the spare value is cached, so the
    /// draw order is part of the stream state.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Exact Poisson sampling. Knuth's product method, split into chunks so
    /// exp(-mean) never underflows; exactness is preserved by additivity.
    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) {
            throw std::invalid_argument("poisson: mean must be non-negative");
        }
        std::uint64_t total = 0;
        while (mean > 256.0) {
            total += poisson_knuth(256.0);
            mean -= 256.0;
        }
        return total + poisson_knuth(mean);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    void seed_from(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
        std::uint64_t mix = seed;
        (void)splitmix64(mix);
        mix ^= 0x517cc1b727220a95ULL * (tag + 1);
        (void)splitmix64(mix);
        mix ^= 0x2545f4914f6cdd1dULL * (index + 1);
        for (auto& word : s_) word = splitmix64(mix);
        // xoshiro must not start from the all-zero state
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t poisson_knuth(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double product = 1.0;
        do {
            ++k;
            product *= uniform();
        } while (product > limit);
        return k - 1;
    }

    std::uint64_t s_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace jsde
