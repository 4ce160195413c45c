#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sis/dynamics.hpp"
#include "sis/model.hpp"
#include "sis/spectral.hpp"

using namespace sis;

namespace {

Model scalar_model(double k, double gamma) {
    ModelData d;
    d.weights = {1.0};
    d.gamma = {gamma};
    d.cost_density = {1.0};
    d.kernel = Matrix::from_rows({{k}});
    return Model::create(d);
}

/// Draws a model whose R0 is at least `margin` away from 1.
Model random_model_away_from_critical(test::Rng& rng, std::size_t n, double margin) {
    for (;;) {
        Model m = test::random_model(rng, n);
        if (std::abs(r0(m) - 1.0) > margin) return m;
    }
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("the vector field vanishes at the disease-free state") {
    test::Rng rng(31);
    Model m = test::random_model(rng, 4);
    Vec f = vector_field(m, test::random_strategy(rng, 4), Vec(4, 0.0));
    CHECK(linf_norm(f) == 0.0);
}

TEST_CASE("the scalar vector field matches hand arithmetic") {
    Model m = scalar_model(3.0, 1.0);
    // (1 - 2/3)*3*(2/3) - 2/3 = 0
    Vec at_equilibrium = vector_field(m, Strategy::ones(1), {2.0 / 3.0});
    CHECK(at_equilibrium[0] == doctest::Approx(0.0).epsilon(1e-15));
    // (1 - 1)*3*1 - 1 = -1
    Vec at_one = vector_field(m, Strategy::ones(1), {1.0});
    CHECK(at_one[0] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("the disease-free state is stationary under integration") {
    test::Rng rng(32);
    Model m = test::random_model(rng, 3);
    auto traj = integrate(m, Strategy::ones(3), Vec(3, 0.0), 5.0, 0.01);
    for (const auto& state : traj) CHECK(linf_norm(state.u) == 0.0);
}

TEST_CASE("the scalar supercritical trajectory reaches 1 - 1/R0") {
    Model m = scalar_model(3.0, 1.0);
    auto traj = integrate(m, Strategy::ones(1), {1.0}, 50.0, default_dt(m));
    CHECK(traj.back().t == doctest::Approx(50.0));
    CHECK(traj.back().u[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("the scalar subcritical trajectory dies out") {
    Model m = scalar_model(0.5, 1.0);
    auto traj = integrate(m, Strategy::ones(1), {1.0}, 80.0, default_dt(m));
    CHECK(std::abs(traj.back().u[0]) < 1e-6);
}

TEST_CASE("a grossly coarse step is rejected") {
    Model m = scalar_model(30.0, 10.0);
    CHECK_THROWS_AS(integrate(m, Strategy::ones(1), {0.9}, 10.0, 1.0), SolverError);
}

TEST_CASE("subcritical equilibria snap to zero") {
    test::Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = test::uniform_index(rng, 1, 4);
        Model m = test::random_model(rng, n, 0.2); // small kernel: usually subcritical
        Strategy eta = test::random_strategy(rng, n);
        if (r_e(m, eta) > 1.0) continue;
        Equilibrium eq = maximal_equilibrium(m, eta);
        CHECK(linf_norm(eq.g) == 0.0);
        CHECK(infected_fraction(m, eta) == 0.0);
    }
}

TEST_CASE("the scalar maximal equilibrium matches 1 - 1/R0") {
    Model m = scalar_model(3.0, 1.0);
    Equilibrium eq = maximal_equilibrium(m, Strategy::ones(1));
    CHECK(eq.is_maximal);
    CHECK(eq.g[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    // oracle: effective reproduction number 1.5 gives 1 - 1/1.5 = 1/3
    Equilibrium half = maximal_equilibrium(m, Strategy({0.5}));
    CHECK(half.g[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("infected_fraction weights the equilibrium by eta and mu") {
    Model m = scalar_model(3.0, 1.0);
    CHECK(infected_fraction(m, Strategy::ones(1)) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("equilibrium residuals meet the advertised bound") {
    test::Rng rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = test::uniform_index(rng, 1, 5);
        Model m = random_model_away_from_critical(rng, n, 0.1);
        Strategy eta = Strategy::ones(n);
        Equilibrium eq = maximal_equilibrium(m, eta);
        double bound = 10.0 * 1e-10 * max_element(m.gamma());
        CHECK(linf_norm(vector_field(m, eta, eq.g)) <= bound);
    }
}

TEST_CASE("fixed-point iterates from 1 are componentwise non-increasing") {
    test::Rng rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = test::uniform_index(rng, 1, 5);
        Model m = test::random_model(rng, n);
        Strategy eta = test::random_strategy(rng, n);
        Vec g(n, 1.0);
        for (int it = 0; it < 200; ++it) {
            Vec t = apply_kernel(m, KernelChoice::Transmission, g, eta);
            Vec next(n);
            for (std::size_t i = 0; i < n; ++i) next[i] = t[i] / (m.gamma()[i] + t[i]);
            for (std::size_t i = 0; i < n; ++i) CHECK(next[i] <= g[i] + 1e-12);
            g = next;
        }
    }
}

TEST_CASE("the ODE limit from any start stays below the maximal equilibrium") {
    test::Rng rng(36);
    int models_done = 0;
    while (models_done < 50) {
        std::size_t n = test::uniform_index(rng, 1, 5);
        Model m = test::random_model(rng, n);
        if (std::abs(r0(m) - 1.0) <= 0.3) continue;
        ++models_done;
        Strategy eta = Strategy::ones(n);
        Equilibrium eq = maximal_equilibrium(m, eta);
        double dt = default_dt(m);
        for (int start = 0; start < 20; ++start) {
            Vec u0(n);
            for (double& x : u0) x = test::uniform(rng, 0.0, 1.0);
            Vec u = u0;
            for (int chunk = 0; chunk < 40; ++chunk) {
                Vec prev = u;
                u = integrate(m, eta, u, 10.0, dt).back().u;
                if (linf_diff(u, prev) <= 1e-8) break;
            }
            for (std::size_t i = 0; i < n; ++i) CHECK(u[i] <= eq.g[i] + 1e-6);
        }
    }
}

TEST_CASE("supercritical equilibria make the residual strategy critical") {
    // R_e(eta * (1 - g_eta)) = 1 whenever R_e(eta) > 1; scalar closed form:
    // R_e(eta (1-g)) = R_e(eta) * (1/R_e(eta)) = 1.
    test::Rng rng(37);
    int done = 0;
    while (done < 50) {
        std::size_t n = test::uniform_index(rng, 1, 5);
        Model m = test::random_model(rng, n, 2.0);
        Strategy eta = test::random_strategy(rng, n);
        if (r_e(m, eta) <= 1.1) continue;
        ++done;
        Equilibrium eq = maximal_equilibrium(m, eta);
        Vec residual_eta(n);
        for (std::size_t i = 0; i < n; ++i) residual_eta[i] = eta[i] * (1.0 - eq.g[i]);
        CHECK(r_e(m, Strategy(residual_eta)) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("integration and the fixed point agree on the equilibrium") {
    test::Rng rng(38);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = test::uniform_index(rng, 1, 4);
        Model m = random_model_away_from_critical(rng, n, 0.1);
        Strategy eta = Strategy::ones(n);
        Equilibrium eq = maximal_equilibrium(m, eta);
        Vec ode = integrate(m, eta, Vec(n, 1.0), 200.0, default_dt(m)).back().u;
        CHECK(linf_diff(ode, eq.g) <= 1e-5);
    }
}

}
