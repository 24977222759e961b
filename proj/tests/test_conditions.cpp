#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "jsde/conditions.hpp"
#include "jsde/models.hpp"

using namespace jsde;
using Catch::Approx;

namespace {

ModelSpec lipschitz_drift_model(double L) {
    ModelSpec spec;
    spec.name = "lipschitz_drift";
    spec.sigma = [](double) { return 0.0; };
    spec.b1 = [L](double x) { return L * x; };
    spec.b2 = [](double) { return 0.0; };
    spec.g0 = [](double, const Mark&) { return 0.0; };
    spec.g1 = [](double, const Mark&) { return 0.0; };
    return spec;
}

}  // namespace

TEST_CASE("concave modulus family", "[conditions]") {
    const auto linear = ConcaveModulus::linear(2.0);
    REQUIRE(linear(0.5) == Approx(1.0));
    const auto zlog = ConcaveModulus::z_log_inv(1.0, 0.05);
    REQUIRE(zlog(0.01) == Approx(0.01 * std::log(100.0)));
    // non-decreasing across the cutoff
    double prev = 0.0;
    for (double z = 1e-6; z < 1.0; z *= 1.3) {
        REQUIRE(zlog(z) >= prev);
        prev = zlog(z);
    }
    SECTION("sqrt modulus is rejected: its reciprocal integral converges") {
        REQUIRE_THROWS_AS(ConcaveModulus::from_name("sqrt", 1.0),
                          std::invalid_argument);
    }
}

TEST_CASE("check_3a on Lipschitz drift", "[conditions]") {
    const auto model = lipschitz_drift_model(2.0);
    const auto grid = uniform_grid(-1.0, 1.0, 33);
    const auto result = check_3a(model, 1, ConcaveModulus::linear(2.0), grid);
    REQUIRE(result.pass);
    REQUIRE(result.worst_ratio <= 1.0);
}

TEST_CASE("check_3a trivially passes when b1 and g1 vanish", "[conditions]") {
    const auto bl = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
    const auto grid = uniform_grid(0.0, 1.0, 17);
    const auto result = check_3a(bl.spec, 1, ConcaveModulus::linear(1.0), grid);
    REQUIRE(result.pass);
    REQUIRE(result.worst_ratio == 0.0);
}

TEST_CASE("monotonicity probe on the paper kernels", "[conditions]") {
    const auto grid = uniform_grid(0.0, 1.0, 257);

    SECTION("Fleming-Viot kernel: x + z q(x, r) is non-decreasing") {
        const auto bl = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
        REQUIRE(check_monotone(bl.spec, 1.0, grid, 64, 7).pass);
    }
    SECTION("self-similar kernel: x + g(x, u, r) is non-decreasing") {
        const auto db = model_doering_barczy(
            make_exponential(1.0, 1.0, 0.0, std::numeric_limits<double>::infinity()),
            4.0);
        const auto pos_grid = uniform_grid(0.0, 3.0, 257);
        REQUIRE(check_monotone(db.spec, 1.0, pos_grid, 64, 7).pass);
    }
    SECTION("the Holder bump breaks monotonicity on (1/2, 1)") {
        const auto bad = model_counterexample(0.5, 1.0);
        const auto result = check_monotone(bad.spec, 1.0, grid, 8, 7);
        REQUIRE_FALSE(result.pass);
        REQUIRE(result.witness_x >= 0.5);
        REQUIRE(result.witness_y <= 1.0);
        REQUIRE(result.witness_x < result.witness_y);
    }
    SECTION("monotone in c: passing at c implies passing at c' >= c") {
        const auto bad = model_counterexample(0.5, 1.0);
        // phi' >= -2 on the decreasing stretch... find a c that passes
        const auto coarse = uniform_grid(0.55, 0.95, 65);
        bool found = false;
        for (double c = 8.0; c >= 0.5; c /= 2.0) {
            const bool pass = check_monotone(bad.spec, c, coarse, 8, 7).pass;
            if (pass) {
                REQUIRE(check_monotone(bad.spec, c * 2.0, coarse, 8, 7).pass);
                found = true;
                break;
            }
        }
        REQUIRE(found);
    }
}

TEST_CASE("check_3b quadratic bounds", "[conditions]") {
    SECTION("Fleming-Viot: K_m = int z^2 nu") {
        const auto bl = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
        const double m2 = 0.5 * 0.5 * 2.0;
        const auto grid = uniform_grid(0.0, 1.0, 21);
        const auto result = check_3b(bl.spec, 1, m2, grid);
        REQUIRE(result.pass);
    }
    SECTION("sigma = sqrt(x v 0): K_m = 1") {
        ModelSpec spec = lipschitz_drift_model(0.0);
        spec.sigma = [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; };
        const auto grid = uniform_grid(0.0, 1.0, 33);
        REQUIRE(check_3b(spec, 1, 1.0, grid).pass);
    }
    SECTION("sigma = x passes with K = 2m") {
        ModelSpec spec = lipschitz_drift_model(0.0);
        spec.sigma = [](double x) { return x; };
        const auto grid = uniform_grid(-1.0, 1.0, 33);
        REQUIRE(check_3b(spec, 1, 2.0, grid).pass);
        REQUIRE_FALSE(check_3b(spec, 1, 1e-3, grid).pass);
    }
}

TEST_CASE("check_3c Holder bound", "[conditions]") {
    ModelSpec spec = lipschitz_drift_model(0.0);
    spec.mu0 = make_uniform_interval(0.0, 1.0, 1.0);
    spec.g0 = [](double x, const Mark& u) {
        return x > 0.0 ? u[0] * std::sqrt(x) : 0.0;
    };
    const MarkFn f = [](const Mark& u) { return std::max(u[0], 1e-12); };
    const auto grid = uniform_grid(0.0, 1.0, 21);

    SECTION("p = 1/2 passes") {
        REQUIRE(check_3c(spec, 1, 0.5, f, grid, 32, 3).pass);
    }
    SECTION("p = 0.6 fails near the diagonal") {
        const auto result = check_3c(spec, 1, 0.6, f, grid, 32, 3);
        REQUIRE_FALSE(result.pass);
        REQUIRE(std::abs(result.witness_x - result.witness_y) <= 0.2);
    }
    SECTION("g0 = 0 passes for any admissible parameters") {
        ModelSpec zero = lipschitz_drift_model(0.0);
        zero.mu0 = make_uniform_interval(0.0, 1.0, 1.0);
        REQUIRE(check_3c(zero, 1, 0.5, f, grid, 16, 3).pass);
    }
}

TEST_CASE("growth conditions", "[conditions]") {
    SECTION("bounded model passes 4a") {
        const auto bad = model_counterexample(0.5, 1.0);  // phi <= 2^{1-alpha}
        const auto grid = uniform_grid(-2.0, 2.0, 65);
        const double bound = 2.0 * counterexample_phi(0.5, 0.5);
        REQUIRE(check_growth(bad.spec, GrowthKind::K4a, grid,
                             bound * bound + 1.0)
                    .pass);
    }
    SECTION("Doering-Barczy passes 6a and 6b") {
        const auto db = model_doering_barczy(
            make_exponential(1.0, 1.0, 0.0, std::numeric_limits<double>::infinity()),
            4.0);
        const auto grid = uniform_grid(0.0, 5.0, 65);
        // b = 0 and g1 = 0, so any K works for (6.a)
        REQUIRE(check_growth(db.spec, GrowthKind::K6a, grid, 1.0).pass);
        // int g0^2 = E2 min(r_max x^2, x) <= E2 (1 + x) with E2 = int (1-e^-u)^2 e^-u du = 1/3
        REQUIRE(check_growth(db.spec, GrowthKind::K6b, grid, 1.0 / 3.0 + 1e-6).pass);
    }
    SECTION("b(x) = x^2 fails 6a at the grid maximum") {
        ModelSpec spec = lipschitz_drift_model(0.0);
        spec.b1 = [](double x) { return x * x; };
        const auto grid = uniform_grid(0.0, 10.0, 41);
        const auto result = check_growth(spec, GrowthKind::K6a, grid, 1.0);
        REQUIRE_FALSE(result.pass);
        REQUIRE(result.witness_x == Approx(10.0));
    }
    SECTION("monotone in tolerance: larger K keeps passing") {
        ModelSpec spec = lipschitz_drift_model(1.0);
        const auto grid = uniform_grid(0.0, 2.0, 17);
        const auto tight = check_growth(spec, GrowthKind::K6a, grid, 1.0);
        REQUIRE(tight.pass);
        REQUIRE(check_growth(spec, GrowthKind::K6a, grid, 2.0).pass);
    }
}

TEST_CASE("checkers are read-only and idempotent", "[conditions]") {
    const auto bl = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
    const auto grid = uniform_grid(0.0, 1.0, 17);
    const auto first = check_3b(bl.spec, 1, 0.5, grid);
    const auto second = check_3b(bl.spec, 1, 0.5, grid);
    REQUIRE(first.pass == second.pass);
    REQUIRE(first.worst_ratio == second.worst_ratio);
    REQUIRE(first.witness_x == second.witness_x);
}
