// Acceptance suite: one criterion per case, each printing PASS or FAIL with
// its runtime. Run with no arguments for all criteria or pass criterion
// numbers to select a subset. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "jsde/conditions.hpp"
#include "jsde/experiments.hpp"
#include "jsde/generator.hpp"
#include "jsde/models.hpp"
#include "jsde/yw.hpp"

using namespace jsde;

namespace {

struct Reporter {
    bool ok = true;
    std::ostringstream log;

    void check(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            log << "    FAILED: " << what << "\n";
        }
    }
};

double inf() { return std::numeric_limits<double>::infinity(); }

ModelSpec zero_base(const std::string& name) {
    ModelSpec spec;
    spec.name = name;
    spec.sigma = [](double) { return 0.0; };
    spec.b1 = [](double) { return 0.0; };
    spec.b2 = [](double) { return 0.0; };
    spec.g0 = [](double, const Mark&) { return 0.0; };
    spec.g1 = [](double, const Mark&) { return 0.0; };
    return spec;
}

ModelSpec bounded_jump_model() {
    ModelSpec spec = zero_base("bounded_jump");
    spec.mu0 = make_point_masses({{0.3, 1.0}, {-0.4, 0.7}});
    spec.g0 = [](double, const Mark& u) { return u[0]; };
    spec.compensator0 = [](double, int n) { return n >= 1 ? 0.02 : 0.0; };
    return spec;
}

// ---------------------------------------------------------------------------
// criterion 1: Yamada-Watanabe function suite
// ---------------------------------------------------------------------------
void criterion_yw_suite(Reporter& r) {
    std::vector<double> grid;
    grid.reserve(100001);
    for (int i = 0; i <= 100000; ++i) grid.push_back(-2.0 + 4e-5 * i);
    for (int k = 1; k <= 10; ++k) {
        const YWFunctions yw(k);
        r.check(std::abs(yw.psi_integral_quadrature() - 1.0) <= 1e-10,
                "int psi_" + std::to_string(k) + " != 1");
        const PropertyReport report = verify_properties(yw, grid, 1e-12);
        for (const PropertyCheck& check : report.checks) {
            r.check(check.pass, "k=" + std::to_string(k) + " " + check.property +
                                    " violated by " +
                                    std::to_string(check.max_violation));
        }
        // psi <= 2/(kx) on log-spaced points of the support
        double worst = 0.0;
        for (int i = 1; i < 1000; ++i) {
            const double x = yw.a_lo() * std::pow(yw.a_hi() / yw.a_lo(), i / 1000.0);
            worst = std::max(worst, yw.psi(x) - 2.0 / (k * x));
        }
        r.check(worst <= 0.0, "psi bound exceeded for k=" + std::to_string(k));
        const double ratio = std::log(yw.a_hi() / yw.a_lo());
        r.check(std::abs(ratio - k) / k <= 1e-12,
                "log(a_{k-1}/a_k) != k for k=" + std::to_string(k));
    }
}

// ---------------------------------------------------------------------------
// criterion 2: Lemma 3.1 identity and inequality chain
// ---------------------------------------------------------------------------
void criterion_lemma31(Reporter& r) {
    RngStream stream(2026);
    int tested = 0;
    while (tested < 1000) {
        const double sign = stream.uniform() < 0.5 ? 1.0 : -1.0;
        const double u = sign * (0.01 + 2.0 * stream.uniform());
        const double eta = 1.5 * stream.uniform() - 0.999 * stream.uniform();
        const double l = u * eta;  // u + l = u(1 + eta), same sign as u
        const int k = 1 + static_cast<int>(stream.uniform() * 8);
        const auto report = lemma31_check(u, 0.0, l, k);
        if (!report.applicable) continue;
        ++tested;
        r.check(std::abs(report.quadrature - report.closed_form) <= 1e-8,
                "identity off at u=" + std::to_string(u) + " l=" + std::to_string(l));
        r.check(report.d_phi_value <= report.middle_bound + 1e-12,
                "first chain link violated");
        r.check(report.middle_bound <= report.final_bound + 1e-12,
                "second chain link violated");
    }
}

// ---------------------------------------------------------------------------
// criterion 3: vanishing property (3.6)
// ---------------------------------------------------------------------------
void criterion_vanishing(Reporter& r) {
    RngStream stream(36);
    for (double c : {0.0, 0.5, 0.9}) {
        for (int k = 1; k <= 5; ++k) {
            const YWFunctions yw(k);
            for (int i = 0; i < 67; ++i) {
                const double gap = yw.a_hi() / (1.0 - c) * (1.0001 + stream.uniform());
                const double sign = stream.uniform() < 0.5 ? 1.0 : -1.0;
                const double u = sign * gap;
                const double l =
                    u * (1.5 * stream.uniform() - 0.999 * c * stream.uniform());
                if (!((1.0 - c) * std::abs(u) >= yw.a_hi())) continue;
                r.check(vanishing_check(c, u, 0.0, l, k),
                        "D phi not exactly zero at c=" + std::to_string(c) +
                            " k=" + std::to_string(k) + " u=" + std::to_string(u));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 4: closed-form integral identities of Corollaries 6.2 / 6.3
// ---------------------------------------------------------------------------
void criterion_identities(Reporter& r) {
    RngStream stream(62);
    const std::vector<LayeredMeasure> nus = {
        make_point_masses({{0.5, 2.0}}),
        make_uniform_interval(0.1, 1.0, 2.0),
        make_power_law(1.0, 3.0, 0.5, 1.0, 3),
    };
    for (const auto& nu : nus) {
        const auto built = model_bertoin_legall(nu);
        const auto& identity = built.facts.identity_checks.at(0);
        for (int i = 0; i < 100; ++i) {
            const double x = stream.uniform();
            const double y = stream.uniform();
            const double err =
                std::abs(identity.quadrature(x, y) - identity.closed_form(x, y));
            r.check(err <= 1e-6, "corollary 6.2 off by " + std::to_string(err));
        }
    }
    const std::vector<LayeredMeasure> mus = {
        make_point_masses({{std::log(2.0), 1.0}}),
        make_exponential(1.0, 1.0, 0.0, inf()),
        make_uniform_interval(0.5, 2.0, 1.0),
    };
    for (const auto& mu : mus) {
        const auto built = model_doering_barczy(mu, 4.0);
        const auto& identity = built.facts.identity_checks.at(0);
        for (int i = 0; i < 100; ++i) {
            const double x = 0.05 + 2.45 * stream.uniform();
            const double y = 0.05 + 2.45 * stream.uniform();
            const double err =
                std::abs(identity.quadrature(x, y) - identity.closed_form(x, y));
            r.check(err <= 1e-6, "corollary 6.3 off by " + std::to_string(err));
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 5: exact interval / positivity invariance over ensembles
// ---------------------------------------------------------------------------
void criterion_invariance(Reporter& r) {
    const double horizon = 5.0;
    const double h = 5.0 / 64.0;
    {
        const auto built = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
        TruncationParams trunc;
        trunc.n0 = 1;
        trunc.n1 = 0;
        trunc.h = h;
        bool inside = true;
        for (int p = 0; p < 1000; ++p) {
            const auto noise = generate_noise(path_seed(500, p), horizon, h,
                                              built.spec.mu0, 1, built.spec.mu1, 0);
            const Path path = simulate(built.spec, trunc, noise, 0.4, horizon);
            for (const PathEvent& ev : path.events) {
                if (ev.x < 0.0 || ev.x > 1.0 || ev.x_left < 0.0 || ev.x_left > 1.0) {
                    inside = false;
                }
            }
        }
        r.check(inside, "Fleming-Viot path left [0,1]");
    }
    {
        const auto built =
            model_doering_barczy(make_exponential(1.0, 1.0, 0.0, inf()), 4.0);
        TruncationParams trunc;
        trunc.n0 = 1;
        trunc.n1 = 0;
        trunc.h = h;
        bool non_negative = true;
        double min_seen = inf();
        for (int p = 0; p < 1000; ++p) {
            const auto noise = generate_noise(path_seed(501, p), horizon, h,
                                              built.spec.mu0, 1, built.spec.mu1, 0);
            const Path path = simulate(built.spec, trunc, noise, 1.0, horizon);
            for (const PathEvent& ev : path.events) {
                if (ev.x < 0.0 || ev.x_left < 0.0) non_negative = false;
            }
            min_seen = std::min(min_seen, path.min_value());
        }
        r.check(non_negative, "self-similar path went negative");
        r.log << "    note: min over paths " << min_seen << ", exactness floor 1/r_max "
              << 0.25 << "\n";
    }
}

// ---------------------------------------------------------------------------
// criterion 6: deterministic non-uniqueness oracle
// ---------------------------------------------------------------------------
void criterion_non_uniqueness(Reporter& r) {
    const auto built = model_counterexample(0.5, 1.0);
    const auto& y1 = built.facts.ode_solutions[0];
    const auto& y2 = built.facts.ode_solutions[1];
    const auto phi = [](double x) { return counterexample_phi(0.5, x); };
    const auto grid = uniform_grid(0.0, 2.0, 2000);
    r.check(ode_residual(phi, y1, grid) <= 1e-6, "y1 residual above 1e-6");
    r.check(ode_residual(phi, y2, grid) <= 1e-6, "y2 residual above 1e-6");
    r.check(y1.y(0.0) == 1.0 && y2.y(0.0) == 1.0, "initial values differ from 1");
    const double t_end = std::sqrt(2.0);
    double sup = 0.0;
    for (double t = 0.0; t <= 2.0; t += 1e-4) {
        sup = std::max(sup, std::abs(y1.y(t) - y2.y(t)));
    }
    r.check(std::abs(sup - 1.0) <= 1e-12, "sup distance != 1");
    r.check(std::abs(y1.y(t_end) - y2.y(t_end)) == 1.0,
            "distance at t = 2^(1/2) != 1");
}

// ---------------------------------------------------------------------------
// criterion 7: pathwise-uniqueness Cauchy experiment
// ---------------------------------------------------------------------------
void criterion_cauchy(Reporter& r) {
    const auto built = model_h_alpha(0.5, 1.0);
    TruncationParams trunc;
    trunc.n0 = 1;
    trunc.n1 = 0;
    trunc.h = std::ldexp(1.0, -12);
    std::vector<double> levels;
    for (int k = 4; k <= 12; ++k) levels.push_back(std::ldexp(1.0, -k));
    const auto table = uniqueness_experiment(built.spec, trunc, 1, 1.0, 1.0, levels);
    r.check(table.size() == 8, "unexpected table size");
    int inversions = 0;
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
        if (table[i + 1].sup_diff > table[i].sup_diff) {
            ++inversions;
            r.check(table[i + 1].sup_diff <= 1.10 * table[i].sup_diff,
                    "inversion beyond 10% at level " + std::to_string(i));
        }
    }
    r.check(inversions <= 1, "more than one inversion");
    r.check(table.back().sup_diff < 1e-2,
            "d(2^-11) = " + std::to_string(table.back().sup_diff));
    for (const auto& row : table) {
        r.log << "    d(" << row.h << ") = " << row.sup_diff << "\n";
    }
}

// ---------------------------------------------------------------------------
// criterion 8: martingale characterization under Monte Carlo
// ---------------------------------------------------------------------------
void criterion_martingale(Reporter& r) {
    TruncationParams trunc;
    trunc.n0 = 1;
    trunc.n1 = 0;
    trunc.h = std::ldexp(1.0, -10);
    {
        const auto model = bounded_jump_model();
        const auto report =
            martingale_residual(model, trunc, tf_cos(), 0.1, 1.0, 10000, 8);
        r.log << "    bounded jump: mean " << report.mean << " se " << report.se
              << " bias " << report.bias_budget << "\n";
        r.check(std::abs(report.mean) <= 3.0 * report.se + report.bias_budget,
                "bounded pure-jump residual outside the band");
    }
    {
        const auto built = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
        const auto report =
            martingale_residual(built.spec, trunc, tf_cos(), 0.5, 1.0, 10000, 9);
        r.log << "    fleming-viot: mean " << report.mean << " se " << report.se
              << " bias " << report.bias_budget << "\n";
        r.check(std::abs(report.mean) <= 3.0 * report.se + report.bias_budget,
                "Fleming-Viot residual outside the band");
    }
}

// ---------------------------------------------------------------------------
// criterion 9: second-moment bound of the strong-solution construction
// ---------------------------------------------------------------------------
void criterion_moment_bound(Reporter& r) {
    TruncationParams trunc;
    trunc.n0 = 0;
    trunc.n1 = 0;
    trunc.h = std::ldexp(1.0, -8);
    const auto grid = uniform_grid(-4.0, 4.0, 65);

    auto run = [&](const ModelSpec& model, double K, double x0,
                   const TruncationParams& tp, std::span<const double> growth_grid) {
        const auto growth = check_growth(model, GrowthKind::K5a, growth_grid, K);
        r.check(growth.pass, model.name + " fails (5.a) with K=" + std::to_string(K));
        const auto report = moment_check(model, tp, 90, x0, 1.0, 10000, K);
        r.log << "    " << model.name << ": estimate " << report.estimate << " + 3se "
              << 3.0 * report.se << " vs bound " << report.bound << "\n";
        r.check(report.pass, model.name + " exceeds the moment bound");
    };

    auto drift = zero_base("unit_drift");
    drift.b1 = [](double) { return 1.0; };
    run(drift, 1.0, 0.0, trunc, grid);

    auto diffusion = zero_base("unit_diffusion");
    diffusion.sigma = [](double) { return 1.0; };
    run(diffusion, 1.0, 0.0, trunc, grid);

    const auto bl = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
    TruncationParams bl_trunc = trunc;
    bl_trunc.n0 = 1;
    const auto pos_grid = uniform_grid(0.0, 1.0, 65);
    run(bl.spec, 0.2, 0.5, bl_trunc, pos_grid);
}

// ---------------------------------------------------------------------------
// criterion 10: tail-index estimator
// ---------------------------------------------------------------------------
void criterion_alpha(Reporter& r) {
    const MarkFn identity = [](const Mark& u) { return u[0]; };
    auto log_grid = [](double hi, double lo, int n) {
        std::vector<double> grid(n);
        for (int i = 0; i < n; ++i) {
            grid[i] = hi * std::pow(lo / hi, static_cast<double>(i) / (n - 1));
        }
        return grid;
    };
    for (double alpha : {1.2, 1.5, 1.8}) {
        const auto mu = make_power_law(-1.0 - alpha, 1.0, 1.0, inf(), 16);
        const double estimate = estimate_alpha(mu, identity, log_grid(0.5, 1e-3, 25));
        r.log << "    alpha " << alpha << " -> " << estimate << "\n";
        r.check(std::abs(estimate - alpha) <= 0.05,
                "alpha estimate off: " + std::to_string(estimate));
    }
    const auto finite = make_uniform_interval(1.0, 2.0, 1.0);
    const double est = estimate_alpha(finite, identity, log_grid(0.5, 1e-3, 25));
    r.check(est == 1.0, "finite measure should give exactly 1");
}

// ---------------------------------------------------------------------------
// criterion 11: determinism and coupling contracts
// ---------------------------------------------------------------------------
void criterion_determinism(Reporter& r) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "jsde_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");

    const nlohmann::json config = {
        {"experiment", "simulate"},
        {"model", {{"name", "bertoin_legall"}}},
        {"trunc", {{"n0", 1}, {"n1", 0}, {"h", 0.0625}}},
        {"seed", 4242},
        {"x0", 0.4},
        {"horizon", 1.0},
        {"n_paths", 20},
        {"output", "paths.csv"}};
    std::ostringstream diag;
    RunOptions opts_a;
    opts_a.output_dir = (dir / "a").string();
    RunOptions opts_b;
    opts_b.output_dir = (dir / "b").string();
    r.check(run_experiment(config, opts_a, diag) == 0, "first run failed");
    r.check(run_experiment(config, opts_b, diag) == 0, "second run failed");
    auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    r.check(slurp(dir / "a" / "paths.csv") == slurp(dir / "b" / "paths.csv"),
            "reruns are not byte-identical");

    // ensemble invariance across thread counts
    const nlohmann::json ens = {{"experiment", "ensemble"},
                                {"model", {{"name", "bertoin_legall"}}},
                                {"trunc", {{"n0", 1}, {"n1", 0}, {"h", 0.125}}},
                                {"seed", 77},
                                {"x0", 0.5},
                                {"horizon", 1.0},
                                {"n_paths", 256},
                                {"output", "stats.csv"}};
    opts_a.threads = 1;
    opts_b.threads = 4;
    r.check(run_experiment(ens, opts_a, diag) == 0, "ensemble run failed");
    r.check(run_experiment(ens, opts_b, diag) == 0, "threaded ensemble run failed");
    r.check(slurp(dir / "a" / "stats.csv") == slurp(dir / "b" / "stats.csv"),
            "thread count changed the ensemble output");

    // coarsening composition and stream splitting, bitwise
    const auto mu0 = product_with_uniform(make_point_masses({{0.5, 2.0}}), 0.0, 1.0);
    const auto mu1 = make_point_masses({{1.0, 0.5}});
    const auto noise = generate_noise(7, 1.0, 1.0 / 256.0, mu0, 1, mu1, 1);
    const auto twice = coarsen(coarsen(noise, 2), 2);
    const auto once = coarsen(noise, 4);
    r.check(twice.brownian == once.brownian, "coarsen composition not exact");
    r.check(once.total_brownian() == noise.total_brownian(),
            "coarsen total not telescoping");

    LayeredMeasure two_layers = make_point_masses({{0.5, 1.0}});
    {
        LayeredMeasure second = make_point_masses({{0.25, 2.0}});
        second.layers[0].index = 2;
        two_layers.layers.push_back(second.layers[0]);
    }
    const auto narrow = generate_noise(9, 2.0, 0.125, two_layers, 1, mu1, 0);
    const auto wide = generate_noise(9, 2.0, 0.125, two_layers, 2, mu1, 0);
    bool split_ok = narrow.brownian == wide.brownian;
    std::vector<Atom> wide_layer1;
    for (const Atom& atom : wide.atoms0) {
        if (atom.layer == 1) wide_layer1.push_back(atom);
    }
    split_ok = split_ok && wide_layer1.size() == narrow.atoms0.size();
    if (split_ok) {
        for (std::size_t i = 0; i < narrow.atoms0.size(); ++i) {
            split_ok = split_ok && narrow.atoms0[i].time == wide_layer1[i].time &&
                       narrow.atoms0[i].mark == wide_layer1[i].mark;
        }
    }
    r.check(split_ok, "stream splitting perturbed existing layers");
    fs::remove_all(dir);
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Reporter&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "Yamada-Watanabe function suite", criterion_yw_suite},
        {2, "Lemma 3.1 identity and chain", criterion_lemma31},
        {3, "vanishing property of D phi", criterion_vanishing},
        {4, "Corollary 6.2 / 6.3 integral identities", criterion_identities},
        {5, "interval and positivity invariance", criterion_invariance},
        {6, "non-uniqueness oracle", criterion_non_uniqueness},
        {7, "pathwise-uniqueness Cauchy experiment", criterion_cauchy},
        {8, "martingale characterization", criterion_martingale},
        {9, "second-moment bound", criterion_moment_bound},
        {10, "tail-index estimator", criterion_alpha},
        {11, "determinism and coupling", criterion_determinism},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), criterion.id) ==
                selected.end()) {
            continue;
        }
        Reporter reporter;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.run(reporter);
        } catch (const std::exception& e) {
            reporter.ok = false;
            reporter.log << "    exception: " << e.what() << "\n";
        }
        const auto elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        std::cout << (reporter.ok ? "PASS" : "FAIL") << " criterion " << criterion.id
                  << ": " << criterion.name << " (" << elapsed << " s)\n"
                  << reporter.log.str();
        if (!reporter.ok) ++failures;
    }
    return failures;
}
