#include "sis/dynamics.hpp"

#include <cmath>

#include "sis/spectral.hpp"

namespace sis {

Vec vector_field(const Model& model, const Strategy& eta, const Vec& g) {
    const std::size_t n = model.size();
    check_dimension(g.size(), n, "g");
    Vec t = apply_kernel(model, KernelChoice::Transmission, g, eta);
    Vec f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = (1.0 - g[i]) * t[i] - model.gamma()[i] * g[i];
    return f;
}

double default_dt(const Model& model) {
    double scale = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        double pressure = model.gamma()[i];
        for (std::size_t j = 0; j < model.size(); ++j)
            pressure += model.kernel()(i, j) * model.weights()[j];
        scale = std::max(scale, pressure);
    }
    return 0.01 / scale;
}

namespace {

/// One RK4 step; returns the largest clamp applied to keep u in [0,1]^n.
double rk4_step(const Model& model, const Strategy& eta, Vec& u, double dt) {
    const std::size_t n = u.size();
    Vec k1 = vector_field(model, eta, u);
    Vec tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
    Vec k2 = vector_field(model, eta, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
    Vec k3 = vector_field(model, eta, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * k3[i];
    Vec k4 = vector_field(model, eta, tmp);

    double clamp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        double c = std::min(1.0, std::max(0.0, v));
        clamp = std::max(clamp, std::abs(v - c));
        u[i] = c;
    }
    return clamp;
}

}  // namespace

std::vector<TrajectoryState> integrate(const Model& model, const Strategy& eta,
                                       const Vec& u0, double t_end, double dt) {
    const std::size_t n = model.size();
    check_dimension(u0.size(), n, "u0");
    check_dimension(eta.size(), n, "strategy");
    if (dt <= 0.0) throw InputError("dt must be positive");
    if (t_end < 0.0) throw InputError("t_end must be nonnegative");
    for (std::size_t i = 0; i < n; ++i)
        if (u0[i] < 0.0 || u0[i] > 1.0)
            throw InputError("u0[" + std::to_string(i) + "] outside [0,1]");

    std::vector<TrajectoryState> traj;
    Vec u = u0;
    traj.push_back({0.0, u});

    const double clamp_limit = 10.0 * std::pow(dt, 5);
    const auto steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    for (std::size_t s = 1; s <= steps; ++s) {
        double clamp = rk4_step(model, eta, u, dt);
        if (clamp > clamp_limit)
            throw SolverError("integration step clamped by " + format_double(clamp) +
                              " > 10*dt^5; dt = " + format_double(dt) + " is too coarse");
        traj.push_back({static_cast<double>(s) * dt, u});
    }
    double t_last = static_cast<double>(steps) * dt;
    if (t_end - t_last > 1e-12 * std::max(1.0, t_end)) {
        double rest = t_end - t_last;
        double clamp = rk4_step(model, eta, u, rest);
        if (clamp > 10.0 * std::pow(rest, 5) + 1e-300)
            throw SolverError("final integration step clamped too hard; dt too coarse");
        traj.push_back({t_end, u});
    }
    return traj;
}

namespace {

/// The fixed-point map g -> T(g) / (gamma + T(g)) with T = T_{k eta};
/// its fixed points are exactly the equilibria of F_eta.
Vec fixed_point_map(const Model& model, const Strategy& eta, const Vec& g) {
    Vec t = apply_kernel(model, KernelChoice::Transmission, g, eta);
    Vec out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        out[i] = t[i] / (model.gamma()[i] + t[i]);
    return out;
}

}  // namespace

Equilibrium maximal_equilibrium(const Model& model, const Strategy& eta, double tol) {
    const std::size_t n = model.size();
    check_dimension(eta.size(), n, "strategy");
    if (tol <= 0.0) throw InputError("equilibrium tolerance must be positive");

    const double re = r_e(model, eta);
    if (re <= 1.0 + 1e-9) {
        // At or below criticality the maximal equilibrium is exactly 0.
        Equilibrium eq;
        eq.g.assign(n, 0.0);
        eq.residual = 0.0;
        eq.is_maximal = true;
        return eq;
    }

    const bool near_critical = re < 1.0 + 1e-3;
    const double eff_tol = near_critical ? std::max(tol, 1e-8) : tol;
    const std::size_t cap = near_critical ? 5000000 : 50000;
    const double max_gamma = max_element(model.gamma());
    const double residual_bound = 10.0 * eff_tol * max_gamma;

    Vec g(n, 1.0);
    for (std::size_t it = 0; it < cap; ++it) {
        Vec next = fixed_point_map(model, eta, g);
        for (std::size_t i = 0; i < n; ++i)
            if (next[i] > g[i] + 1e-12)
                throw SolverError("equilibrium iteration lost monotonicity at component " +
                                  std::to_string(i) + " (numerics bug)");
        double step = linf_diff(next, g);
        g = std::move(next);
        if (step <= eff_tol) {
            double resid = linf_norm(vector_field(model, eta, g));
            if (resid <= residual_bound) {
                Equilibrium eq;
                eq.g = std::move(g);
                eq.residual = resid;
                eq.is_maximal = true;
                if (near_critical)
                    eq.warning = "near-critical (R_e = " + format_double(re) +
                                 "); tolerance relaxed to " + format_double(eff_tol);
                return eq;
            }
        }
    }

    // Fixed-point cap exhausted; integrate from the all-infected state with
    // doubling horizons.
    double dt = default_dt(model);
    double t_end = 200.0;
    for (int attempt = 0; attempt < 7; ++attempt) {
        Vec u = integrate(model, eta, Vec(n, 1.0), t_end, dt).back().u;
        double resid = linf_norm(vector_field(model, eta, u));
        if (resid <= residual_bound) {
            Equilibrium eq;
            eq.g = std::move(u);
            eq.residual = resid;
            eq.is_maximal = true;
            eq.warning = "fixed-point iteration hit its cap; equilibrium from ODE integration to t = " +
                         format_double(t_end);
            return eq;
        }
        t_end *= 2.0;
    }
    throw SolverError("maximal equilibrium did not converge (R_e = " + format_double(re) + ")");
}

double infected_fraction(const Model& model, const Strategy& eta, double tol) {
    Equilibrium eq = maximal_equilibrium(model, eta, tol);
    double s = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i)
        s += eq.g[i] * eta[i] * model.weights()[i];
    return s;
}

}  // namespace sis
