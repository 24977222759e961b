#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "jsde/conditions.hpp"
#include "jsde/models.hpp"
#include "jsde/quadrature.hpp"
#include "jsde/rng.hpp"

using namespace jsde;
using Catch::Approx;

TEST_CASE("h_alpha kernel values", "[models]") {
    REQUIRE(h_alpha_fn(0.5, 4.0) == Approx(4.0));     // 2 sqrt(4)
    REQUIRE(h_alpha_fn(0.5, 1.0) == Approx(2.0));
    REQUIRE(h_alpha_fn(0.5, -1.0) == 0.0);
    REQUIRE(h_alpha_fn(0.5, 0.0) == 0.0);
}

TEST_CASE("h_alpha model: flow solutions certified by the residual", "[models]") {
    const auto built = model_h_alpha(0.5, 1.0);
    const auto grid = uniform_grid(1e-4, 2.0, 400);
    const auto phi = [](double x) { return h_alpha_fn(0.5, x); };
    for (const OdeSolution& sol : built.facts.ode_solutions) {
        REQUIRE(ode_residual(phi, sol, grid) <= 1e-6);
    }
    // spot derivative check: x2(t) = t^2, x2'(3) = 6 = 2 sqrt(9)
    const auto& x2 = built.facts.ode_solutions[1];
    REQUIRE(x2.y(3.0) == Approx(9.0));
    REQUIRE(x2.y_prime(3.0) == Approx(6.0));
    SECTION("centered differences also certify the solution") {
        OdeSolution numeric = x2;
        numeric.y_prime = nullptr;
        REQUIRE(ode_residual(phi, numeric, uniform_grid(0.1, 1.9, 100)) <= 1e-6);
    }
}

TEST_CASE("counterexample phi and its two flow solutions", "[models]") {
    const double alpha = 0.5;
    REQUIRE(counterexample_phi(alpha, 0.75) ==
            Approx(2.0 * std::min(std::sqrt(0.75), 0.5)));
    REQUIRE(counterexample_phi(alpha, -0.1) == 0.0);
    REQUIRE(counterexample_phi(alpha, 1.1) == 0.0);
    REQUIRE(counterexample_phi(alpha, 1.0) == 0.0);

    const auto built = model_counterexample(alpha, 1.0);
    const auto& y1 = built.facts.ode_solutions[0];
    const auto& y2 = built.facts.ode_solutions[1];
    const auto phi = [alpha](double x) { return counterexample_phi(alpha, x); };

    SECTION("both start at 1 and solve the flow to 1e-6") {
        REQUIRE(y1.y(0.0) == 1.0);
        REQUIRE(y2.y(0.0) == 1.0);
        const auto grid = uniform_grid(0.0, 2.0, 1000);
        REQUIRE(ode_residual(phi, y1, grid) == 0.0);  // phi(1) = 0 exactly
        REQUIRE(ode_residual(phi, y2, grid) <= 1e-6);
    }
    SECTION("branch values: y2(0.5) = 0.75 with slope -1") {
        REQUIRE(y2.y(0.5) == Approx(0.75));
        REQUIRE(y2.y_prime(0.5) == Approx(-1.0));
        REQUIRE(phi(0.75) == Approx(1.0));
    }
    SECTION("y2 is absorbed at zero from t = 2^alpha") {
        const double t_end = std::pow(2.0, alpha);
        REQUIRE(y2.y(t_end) == 0.0);
        REQUIRE(y2.y(t_end + 0.3) == 0.0);
    }
    SECTION("sup distance between the two solutions is exactly 1 at 2^alpha") {
        const double t_end = std::pow(2.0, alpha);
        double sup = 0.0;
        for (double t = 0.0; t <= t_end + 0.5; t += 1e-3) {
            sup = std::max(sup, std::abs(y1.y(t) - y2.y(t)));
        }
        REQUIRE(sup == Approx(1.0));
        REQUIRE(std::abs(y1.y(t_end) - y2.y(t_end)) == 1.0);
    }
}

TEST_CASE("Fleming-Viot kernel facts", "[models]") {
    SECTION("jump arithmetic: x=0.4, z=0.5, r=0.3") {
        REQUIRE(0.4 + 0.5 * bl_q(0.4, 0.3) == Approx(0.7));
    }
    SECTION("q vanishes outside (0, 1)") {
        REQUIRE(bl_q(-0.2, 0.5) == 0.0);
        REQUIRE(bl_q(1.3, 0.5) == 0.0);
        REQUIRE(bl_q(1.0, 0.5) == 0.0);
    }
    SECTION("jump map keeps [0, 1] exactly") {
        const auto built = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
        RngStream stream(42);
        for (int i = 0; i < 20000; ++i) {
            const double x = stream.uniform();
            const Mark m{stream.uniform_pos(), stream.uniform_pos()};
            const double next = built.spec.jump_map0(x, m);
            REQUIRE(next >= 0.0);
            REQUIRE(next <= 1.0);
            // consistency with x + g0
            REQUIRE(next == Approx(x + built.spec.g0(x, m)).margin(1e-12));
        }
    }
    SECTION("compensator vanishes by quadrature") {
        for (double x : {0.0, 0.1, 0.5, 0.77, 1.0}) {
            const double value = integrate_gk_pieces(
                [x](double r) { return bl_q(x, r); }, 0.0, 1.0,
                std::array<double, 1>{x}, 1e-12);
            REQUIRE(std::abs(value) <= 1e-12);
        }
    }
    SECTION("corollary 6.2 identity at the frozen point") {
        const auto built = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
        const auto& identity = built.facts.identity_checks.at(0);
        // [|x-y| - (x-y)^2] z^2 nu = (0.4 - 0.16) * 0.25 * 2... with nu({0.5}) = 2
        REQUIRE(identity.closed_form(0.3, 0.7) == Approx(0.12));
        REQUIRE(identity.quadrature(0.3, 0.7) == Approx(0.12).margin(1e-8));
    }
    SECTION("identity holds for random pairs and two more nu choices") {
        RngStream stream(77);
        const std::vector<LayeredMeasure> nus = {
            make_point_masses({{0.5, 2.0}}),
            make_uniform_interval(0.1, 1.0, 2.0),
            make_power_law(1.0, 3.0, 0.5, 1.0, 3),  // density 3u on (0,1] pieces
        };
        for (const auto& nu : nus) {
            const auto built = model_bertoin_legall(nu);
            const auto& identity = built.facts.identity_checks.at(0);
            for (int i = 0; i < 25; ++i) {
                const double x = stream.uniform();
                const double y = stream.uniform();
                REQUIRE(identity.quadrature(x, y) ==
                        Approx(identity.closed_form(x, y)).margin(1e-6));
            }
        }
    }
}

TEST_CASE("self-similar kernel facts", "[models]") {
    SECTION("jump arithmetic") {
        REQUIRE(2.0 + db_g(2.0, std::log(2.0), 0.4) == Approx(1.0));
        REQUIRE(2.0 + db_g(2.0, std::log(2.0), 0.6) == Approx(2.0));
    }
    SECTION("positivity of the jump map is exact") {
        const auto built = model_doering_barczy(
            make_exponential(1.0, 1.0, 0.0, std::numeric_limits<double>::infinity()),
            4.0);
        RngStream stream(11);
        for (int i = 0; i < 20000; ++i) {
            const double x = 3.0 * stream.uniform();
            const Mark m{-std::log(stream.uniform_pos()),
                         4.0 * stream.uniform_pos()};
            const double next = built.spec.jump_map0(x, m);
            REQUIRE(next >= 0.0);
            REQUIRE(next <= std::max(x, 0.0));
            REQUIRE(next == Approx(x + built.spec.g0(x, m)).margin(1e-12));
        }
    }
    SECTION("closed-form compensator matches layer quadrature") {
        const auto built = model_doering_barczy(
            make_exponential(1.0, 1.0, 0.0, std::numeric_limits<double>::infinity()),
            4.0);
        for (double x : {0.05, 0.3, 1.0, 2.5}) {
            const double closed = built.spec.compensator0(x, 1);
            const double quad = integrate(
                built.spec.mu0,
                [&](const Mark& m) { return built.spec.g0(x, m); }, 1, 1e-10);
            REQUIRE(closed == Approx(quad).margin(1e-8));
        }
        REQUIRE(built.spec.compensator0(0.0, 1) == 0.0);
    }
    SECTION("corollary 6.3 identity: frozen point mass case") {
        // mu = delta at log 2 with weight 1: int (1-e^-u)^2 mu = 1/4
        const auto built =
            model_doering_barczy(make_point_masses({{std::log(2.0), 1.0}}), 4.0);
        const auto& identity = built.facts.identity_checks.at(0);
        REQUIRE(identity.closed_form(1.0, 2.0) == Approx(0.25));
        REQUIRE(identity.quadrature(1.0, 2.0) == Approx(0.25).margin(1e-8));
    }
    SECTION("identity for an exponential mu and random pairs") {
        const auto built = model_doering_barczy(
            make_exponential(1.0, 1.0, 0.0, std::numeric_limits<double>::infinity()),
            4.0);
        const auto& identity = built.facts.identity_checks.at(0);
        RngStream stream(13);
        for (int i = 0; i < 25; ++i) {
            const double x = 0.05 + 2.5 * stream.uniform();
            const double y = 0.05 + 2.5 * stream.uniform();
            REQUIRE(identity.quadrature(x, y) ==
                    Approx(identity.closed_form(x, y)).margin(1e-6));
        }
    }
    SECTION("divergent compensator series is flagged") {
        // density u^-2 near zero: (1 ^ u^2) integrable, (1 - e^-u) is not
        const auto mu = make_power_law(-2.0, 1.0, 1.0, 2.0, 12);
        const auto built = model_doering_barczy(mu, 2.0);
        REQUIRE_FALSE(built.facts.compensator_series_converged);
    }
    SECTION("exponential preset is not flagged") {
        const auto built = model_doering_barczy(
            make_exponential(1.0, 1.0, 0.0, std::numeric_limits<double>::infinity()),
            4.0);
        REQUIRE(built.facts.compensator_series_converged);
    }
}

TEST_CASE("kernels pass the c = 1 monotonicity probe", "[models]") {
    const auto grid = uniform_grid(0.0, 1.0, 129);
    const auto bl = model_bertoin_legall(make_point_masses({{0.5, 2.0}}));
    REQUIRE(check_monotone(bl.spec, 1.0, grid, 32, 5).pass);
    const auto db = model_doering_barczy(
        make_exponential(1.0, 1.0, 0.0, std::numeric_limits<double>::infinity()), 4.0);
    const auto pos = uniform_grid(0.0, 3.0, 129);
    REQUIRE(check_monotone(db.spec, 1.0, pos, 32, 5).pass);
}

TEST_CASE("alpha must be in (0,1) and r_max positive", "[models]") {
    REQUIRE_THROWS_AS(model_h_alpha(1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(model_h_alpha(0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(
        model_doering_barczy(make_point_masses({{1.0, 1.0}}), 0.0),
        std::invalid_argument);
}
