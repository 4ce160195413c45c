#ifndef SIS_DYNAMICS_HPP
#define SIS_DYNAMICS_HPP

#include <string>
#include <vector>

#include "sis/model.hpp"
#include "sis/types.hpp"

namespace sis {

/// One sample of a trajectory: u[i] is the probability that a
/// non-vaccinated individual of feature i is infected at time t.
struct TrajectoryState {
    double t = 0.0;
    Vec u;
};

struct Equilibrium {
    Vec g;                 ///< equilibrium state in [0,1]^n
    double residual = 0.0; ///< ||F_eta(g)||_inf
    bool is_maximal = false;
    std::string warning;   ///< non-empty when a near-critical relaxation applied
};

/// Vaccinated SIS vector field F_eta(g) = (1 - g) T_{k eta}(g) - gamma g.
Vec vector_field(const Model& model, const Strategy& eta, const Vec& g);

/// Stiffness-scaled default step: 0.01 / max_i (gamma_i + sum_j k(i,j) mu_j).
double default_dt(const Model& model);

/// Classical fixed-step RK4 from u0, states emitted at 0, dt, 2dt, ...
/// (plus t_end itself when it is not a multiple). Each state is clamped to
/// [0,1]^n; a clamp larger than 10*dt^5 means dt is too coarse and raises
/// SolverError.
std::vector<TrajectoryState> integrate(const Model& model, const Strategy& eta,
                                       const Vec& u0, double t_end, double dt);

/// Maximal equilibrium by the monotone fixed-point map
///   g <- T_{k eta}(g) / (gamma + T_{k eta}(g))
/// started from g = 1. Iterates are componentwise non-increasing (checked).
/// Subcritical snap: if R_e(eta) <= 1 + 1e-9 the result is exactly 0.
/// Near criticality (|R_e - 1| < 1e-3) the cap is raised 100x and the
/// tolerance relaxed to 1e-8, with a warning on the result. If the cap is
/// still hit, falls back to integrating from 1 with doubling horizons.
Equilibrium maximal_equilibrium(const Model& model, const Strategy& eta, double tol = 1e-10);

/// Effective fraction of infected at equilibrium: sum_i g_i eta_i mu_i.
double infected_fraction(const Model& model, const Strategy& eta, double tol = 1e-10);

}  // namespace sis

#endif
