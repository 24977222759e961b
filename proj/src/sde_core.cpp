#include "jsde/sde_core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "jsde/stats.hpp"

namespace jsde {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::size_t checked_steps(double horizon, double h) {
    if (!(horizon > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("simulate: horizon and step must be positive");
    }
    const double ratio = horizon / h;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 4.0 * ratio * 1e-16) {
        throw std::invalid_argument("simulate: step must divide the horizon");
    }
    return static_cast<std::size_t>(rounded);
}

}  // namespace

bool ModelSpec::in_u2(int layer) const {
    return std::find(u2_layers.begin(), u2_layers.end(), layer) != u2_layers.end();
}

double ModelSpec::compensator(double x, int n, double tol) const {
    if (n <= 0) return 0.0;
    if (compensator0) return compensator0(x, n);
    return integrate(
        mu0, [&](const Mark& u) { return g0(x, u); }, n, tol);
}

double chi(double m, double x) { return std::clamp(x, -m, m); }

void check_registration(const ModelSpec& model, std::uint64_t probe_seed) {
    // sample a handful of marks per mu0/mu1 layer for the pointwise checks
    auto sample_marks = [&](const LayeredMeasure& mu, std::uint64_t tag) {
        std::vector<Mark> marks;
        for (const Layer& layer : mu.layers) {
            RngStream stream(probe_seed, tag, static_cast<std::uint64_t>(layer.index));
            for (int i = 0; i < 8; ++i) marks.push_back(layer.sample(stream));
        }
        return marks;
    };
    const auto marks0 = sample_marks(model.mu0, 101);
    const auto marks1 = sample_marks(model.mu1, 102);

    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(-2.0 + 0.04 * i);

    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (model.b2(grid[i + 1]) < model.b2(grid[i]) - 1e-12) {
            throw std::invalid_argument("model " + model.name +
                                        ": b2 is not non-decreasing near x = " +
                                        std::to_string(grid[i]));
        }
    }

    if (model.domain == Domain::NonNegative) {
        for (double x : grid) {
            if (x <= 0.0) {
                if (model.b(x) < 0.0 || model.sigma(x) != 0.0) {
                    throw std::invalid_argument(
                        "model " + model.name +
                        ": non-negative domain requires b >= 0 and sigma = 0 for x <= 0");
                }
                for (const Mark& u : marks0) {
                    if (model.g0(x, u) != 0.0) {
                        throw std::invalid_argument("model " + model.name +
                                                    ": g0 must vanish for x <= 0");
                    }
                }
            } else {
                for (const Mark& u : marks0) {
                    if (x + model.g0(x, u) < 0.0) {
                        throw std::invalid_argument("model " + model.name +
                                                    ": x + g0 must stay non-negative");
                    }
                }
            }
            for (const Mark& u : marks1) {
                if (x + model.g1(x, u) < 0.0) {
                    throw std::invalid_argument("model " + model.name +
                                                ": x + g1 must stay non-negative");
                }
            }
        }
    }
}

double Path::min_value() const {
    double lo = initial;
    for (const PathEvent& ev : events) lo = std::min(lo, std::min(ev.x_left, ev.x));
    return lo;
}

double Path::max_abs() const {
    double hi = std::abs(initial);
    for (const PathEvent& ev : events) {
        hi = std::max(hi, std::max(std::abs(ev.x_left), std::abs(ev.x)));
    }
    return hi;
}

Path simulate(const ModelSpec& model, const TruncationParams& trunc,
              const NoiseRealization& noise, double x0, double horizon) {
    if (!std::isfinite(x0)) throw std::invalid_argument("simulate: x0 must be finite");
    if (model.domain == Domain::NonNegative && x0 < 0.0) {
        throw std::invalid_argument("simulate: non-negative model needs x0 >= 0");
    }
    if (horizon > noise.horizon * (1.0 + 1e-12)) {
        throw std::invalid_argument("simulate: horizon exceeds the noise realization");
    }
    if (trunc.n0 > noise.n_layers0 || trunc.n1 > noise.n_layers1) {
        throw std::invalid_argument("simulate: noise has fewer layers than requested");
    }
    if (!(trunc.m >= 1.0)) throw std::invalid_argument("simulate: need m >= 1");

    const std::size_t steps = checked_steps(horizon, trunc.h);
    const double cells_ratio = trunc.h / noise.h_min;
    const double cells_rounded = std::round(cells_ratio);
    if (std::abs(cells_ratio - cells_rounded) > 4.0 * cells_ratio * 1e-16 ||
        cells_rounded < 1.0) {
        throw std::invalid_argument("simulate: step must be a multiple of the noise h_min");
    }
    const std::size_t cells_per_step = static_cast<std::size_t>(cells_rounded);
    const std::size_t total_cells =
        std::min(noise.brownian.size(), steps * cells_per_step);

    // event timeline: grid points and retained atoms, ordered by time with
    // grid events before coincident atoms and mu0 atoms before mu1 atoms
    struct Event {
        double t;
        int kind;  // 0 grid, 1 mu0 atom, 2 mu1 atom
        const Atom* atom;
        std::size_t cell_limit;
    };
    std::vector<Event> events;
    events.reserve(steps + noise.atoms0.size() + noise.atoms1.size());
    for (std::size_t i = 1; i <= steps; ++i) {
        const double t = (i == steps) ? horizon : static_cast<double>(i) * trunc.h;
        events.push_back({t, 0, nullptr, std::min(i * cells_per_step, total_cells)});
    }
    auto add_atoms = [&](const std::vector<Atom>& atoms, int max_layer, int kind) {
        for (const Atom& atom : atoms) {
            if (atom.layer > max_layer || atom.time > horizon) continue;
            const auto limit = static_cast<std::size_t>(
                std::min(std::floor(atom.time / noise.h_min),
                         static_cast<double>(total_cells)));
            events.push_back({atom.time, kind, &atom, limit});
        }
    };
    add_atoms(noise.atoms0, trunc.n0, 1);
    add_atoms(noise.atoms1, trunc.n1, 2);
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.kind < b.kind;
    });

    Path path;
    path.initial = x0;
    path.horizon = horizon;
    path.events.reserve(events.size());

    // compensator cache: between jumps the truncated state is often unchanged
    double comp_arg = kNan, comp_value = 0.0;
    auto compensator_at = [&](double xm) {
        if (xm == comp_arg) return comp_value;
        comp_arg = xm;
        comp_value = model.compensator(xm, trunc.n0);
        return comp_value;
    };

    double x = x0;
    double prev_t = 0.0;
    std::size_t cursor = 0;
    std::span<const double> cells(noise.brownian);
    for (const Event& ev : events) {
        const double dt = ev.t - prev_t;
        const std::size_t limit = std::max(ev.cell_limit, cursor);
        double x_left = x;
        if (dt > 0.0 || limit > cursor) {
            const double db = pairwise_sum(cells.subspan(cursor, limit - cursor));
            const double xm = trunc.truncate_state ? chi(trunc.m, x) : x;
            const double drift = model.b1(xm) - model.b2(xm) - compensator_at(xm);
            x_left = x + drift * dt + model.sigma(xm) * db;
        }
        double x_new = x_left;
        if (ev.kind == 1) {
            const double xm = trunc.truncate_state ? chi(trunc.m, x_left) : x_left;
            x_new = model.jump_map0 ? model.jump_map0(xm, ev.atom->mark)
                                    : x_left + model.g0(xm, ev.atom->mark);
        } else if (ev.kind == 2) {
            const double xm = trunc.truncate_state ? chi(trunc.m, x_left) : x_left;
            double jump = model.g1(xm, ev.atom->mark);
            if (trunc.truncate_g1) jump = chi(trunc.m, jump);
            x_new = x_left + jump;
        }
        if (!std::isfinite(x_new)) {
            throw std::runtime_error("simulate: state became non-finite at t = " +
                                     std::to_string(ev.t) + " (previous state " +
                                     std::to_string(x) + ")");
        }
        path.events.push_back({ev.t, x_left, x_new});
        x = x_new;
        prev_t = ev.t;
        cursor = limit;
    }
    return path;
}

std::uint64_t path_seed(std::uint64_t seed, int path_index) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(path_index + 1);
    return splitmix64(s);
}

// ---------------------------------------------------------------------------
// deterministic block-parallel reduction
// ---------------------------------------------------------------------------

namespace {

constexpr int kBlockSize = 64;

// Runs fn(i) for i in [0, n) over fixed 64-item blocks, possibly in
// parallel, and hands each finished block's samples to collect() in block
// order. Results are independent of the thread count.
void run_blocks(int n, int threads,
                const std::function<double(int)>& fn,
                const std::function<void(int, std::span<const double>)>& collect) {
    const int n_blocks = (n + kBlockSize - 1) / kBlockSize;
    std::vector<std::vector<double>> block_values(n_blocks);
    std::atomic<int> next_block{0};
    auto worker = [&]() {
        for (;;) {
            const int b = next_block.fetch_add(1);
            if (b >= n_blocks) return;
            const int begin = b * kBlockSize;
            const int end = std::min(n, begin + kBlockSize);
            auto& out = block_values[b];
            out.reserve(end - begin);
            for (int i = begin; i < end; ++i) out.push_back(fn(i));
        }
    };
    threads = std::clamp(threads, 1, n_blocks);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (int b = 0; b < n_blocks; ++b) collect(b, block_values[b]);
}

}  // namespace

MeanSe mc_mean_se(int n, int threads, const std::function<double(int)>& fn) {
    const int n_blocks = (n + kBlockSize - 1) / kBlockSize;
    std::vector<double> sums(n_blocks, 0.0), squares(n_blocks, 0.0);
    run_blocks(n, threads, fn, [&](int b, std::span<const double> values) {
        double s = 0.0, ss = 0.0;
        for (double v : values) {
            s += v;
            ss += v * v;
        }
        sums[b] = s;
        squares[b] = ss;
    });
    const double total = pairwise_sum(sums);
    const double total_sq = pairwise_sum(squares);
    MeanSe result;
    result.mean = total / n;
    if (n > 1) {
        const double var = std::max(0.0, (total_sq - total * total / n) / (n - 1.0));
        result.se = std::sqrt(var / n);
    }
    return result;
}

EnsembleStats simulate_ensemble(const ModelSpec& model,
                                const TruncationParams& trunc,
                                std::uint64_t seed, double x0, double horizon,
                                int n_paths, int threads) {
    if (n_paths < 1) throw std::invalid_argument("ensemble: need at least one path");
    const std::size_t steps = checked_steps(horizon, trunc.h);

    EnsembleStats stats;
    stats.n_paths = n_paths;
    stats.t_grid.resize(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        stats.t_grid[i] = (i + 1 == steps) ? horizon : static_cast<double>(i + 1) * trunc.h;
    }

    const int n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;
    struct BlockAcc {
        std::vector<double> sum, sum_sq, lo, hi;
        double sup_sum = 0.0, sup_sq = 0.0;
        double min_value = std::numeric_limits<double>::infinity();
    };
    std::vector<BlockAcc> blocks(n_blocks);

    auto run_path = [&](int p) {
        const NoiseRealization noise =
            generate_noise(path_seed(seed, p), horizon, trunc.h, model.mu0, trunc.n0,
                           model.mu1, trunc.n1);
        return simulate(model, trunc, noise, x0, horizon);
    };

    std::atomic<int> next_block{0};
    auto worker = [&]() {
        std::vector<double> values(steps);
        for (;;) {
            const int b = next_block.fetch_add(1);
            if (b >= n_blocks) return;
            BlockAcc& acc = blocks[b];
            acc.sum.assign(steps, 0.0);
            acc.sum_sq.assign(steps, 0.0);
            acc.lo.assign(steps, std::numeric_limits<double>::infinity());
            acc.hi.assign(steps, -std::numeric_limits<double>::infinity());
            const int begin = b * kBlockSize;
            const int end = std::min(n_paths, begin + kBlockSize);
            for (int p = begin; p < end; ++p) {
                const Path path = run_path(p);
                // path value at each grid time = post value of the last event
                // not after it (atoms coincident with a grid time come last)
                std::size_t e = 0;
                double sup_abs = std::abs(x0);
                for (std::size_t i = 0; i < steps; ++i) {
                    const double t = stats.t_grid[i];
                    while (e < path.events.size() && path.events[e].t <= t) ++e;
                    const double v = (e == 0) ? x0 : path.events[e - 1].x;
                    values[i] = v;
                }
                for (const PathEvent& ev : path.events) {
                    sup_abs = std::max(sup_abs,
                                       std::max(std::abs(ev.x_left), std::abs(ev.x)));
                }
                for (std::size_t i = 0; i < steps; ++i) {
                    acc.sum[i] += values[i];
                    acc.sum_sq[i] += values[i] * values[i];
                    acc.lo[i] = std::min(acc.lo[i], values[i]);
                    acc.hi[i] = std::max(acc.hi[i], values[i]);
                }
                const double sup_sq = 1.0 + sup_abs * sup_abs;
                acc.sup_sum += sup_sq;
                acc.sup_sq += sup_sq * sup_sq;
                acc.min_value = std::min(acc.min_value, path.min_value());
            }
        }
    };
    const int pool_size = std::clamp(threads, 1, n_blocks);
    if (pool_size == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < pool_size; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    stats.mean.resize(steps);
    stats.variance.resize(steps);
    stats.min.resize(steps);
    stats.max.resize(steps);
    stats.se.resize(steps);
    std::vector<double> scratch(n_blocks);
    const double n = static_cast<double>(n_paths);
    for (std::size_t i = 0; i < steps; ++i) {
        for (int b = 0; b < n_blocks; ++b) scratch[b] = blocks[b].sum[i];
        const double total = pairwise_sum(scratch);
        for (int b = 0; b < n_blocks; ++b) scratch[b] = blocks[b].sum_sq[i];
        const double total_sq = pairwise_sum(scratch);
        stats.mean[i] = total / n;
        stats.variance[i] =
            n > 1 ? std::max(0.0, (total_sq - total * total / n) / (n - 1.0)) : 0.0;
        stats.se[i] = std::sqrt(stats.variance[i] / n);
        double lo = blocks[0].lo[i], hi = blocks[0].hi[i];
        for (int b = 1; b < n_blocks; ++b) {
            lo = std::min(lo, blocks[b].lo[i]);
            hi = std::max(hi, blocks[b].hi[i]);
        }
        stats.min[i] = lo;
        stats.max[i] = hi;
    }
    for (int b = 0; b < n_blocks; ++b) scratch[b] = blocks[b].sup_sum;
    const double sup_total = pairwise_sum(scratch);
    for (int b = 0; b < n_blocks; ++b) scratch[b] = blocks[b].sup_sq;
    const double sup_total_sq = pairwise_sum(scratch);
    stats.sup_sq_mean = sup_total / n;
    const double sup_var =
        n > 1 ? std::max(0.0, (sup_total_sq - sup_total * sup_total / n) / (n - 1.0))
              : 0.0;
    stats.sup_sq_se = std::sqrt(sup_var / n);
    stats.min_over_paths = blocks[0].min_value;
    for (int b = 1; b < n_blocks; ++b) {
        stats.min_over_paths = std::min(stats.min_over_paths, blocks[b].min_value);
    }
    return stats;
}

std::vector<UniquenessRow> uniqueness_experiment(const ModelSpec& model,
                                                 const TruncationParams& trunc,
                                                 std::uint64_t seed, double x0,
                                                 double horizon,
                                                 std::span<const double> levels) {
    if (levels.size() < 2) {
        throw std::invalid_argument("uniqueness: need at least two refinement levels");
    }
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        if (!(levels[i] > levels[i + 1])) {
            throw std::invalid_argument("uniqueness: levels must decrease");
        }
    }
    const double h_min = levels.back();
    const NoiseRealization base = generate_noise(seed, horizon, h_min, model.mu0,
                                                 trunc.n0, model.mu1, trunc.n1);

    std::vector<Path> paths;
    paths.reserve(levels.size());
    for (double h : levels) {
        const double ratio = h / h_min;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 * ratio) {
            throw std::invalid_argument("uniqueness: level is not a multiple of the finest");
        }
        const NoiseRealization coarse = coarsen(base, static_cast<int>(rounded));
        TruncationParams level_trunc = trunc;
        level_trunc.h = h;
        paths.push_back(simulate(model, level_trunc, coarse, x0, horizon));
    }

    std::vector<UniquenessRow> table;
    for (std::size_t lvl = 0; lvl + 1 < paths.size(); ++lvl) {
        const Path& coarse = paths[lvl];
        const Path& fine = paths[lvl + 1];
        double sup = 0.0;
        std::size_t j = 0;
        for (std::size_t i = 0; i < coarse.events.size(); ++i) {
            // last recorded value at this common time, on both paths
            if (i + 1 < coarse.events.size() &&
                coarse.events[i + 1].t == coarse.events[i].t) {
                continue;
            }
            const double t = coarse.events[i].t;
            while (j < fine.events.size() && fine.events[j].t < t) ++j;
            std::size_t last = j;
            while (last + 1 < fine.events.size() && fine.events[last + 1].t == t) ++last;
            if (last < fine.events.size() && fine.events[last].t == t) {
                sup = std::max(sup, std::abs(coarse.events[i].x - fine.events[last].x));
            }
        }
        table.push_back({levels[lvl], sup});
    }
    return table;
}

MomentReport moment_check(const ModelSpec& model, const TruncationParams& trunc,
                          std::uint64_t seed, double x0, double horizon,
                          int n_paths, double K, int threads) {
    const EnsembleStats stats =
        simulate_ensemble(model, trunc, seed, x0, horizon, n_paths, threads);
    MomentReport report;
    report.estimate = stats.sup_sq_mean;
    report.se = stats.sup_sq_se;
    report.K = K;
    report.bound =
        (1.0 + 6.0 * x0 * x0) * std::exp(6.0 * K * (4.0 + horizon) * horizon);
    report.pass = report.estimate + 3.0 * report.se <= report.bound;
    return report;
}

}  // namespace jsde
