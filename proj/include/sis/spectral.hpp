#ifndef SIS_SPECTRAL_HPP
#define SIS_SPECTRAL_HPP

#include <cstddef>

#include "sis/model.hpp"
#include "sis/types.hpp"

namespace sis {

/// Which kernel the integral operator uses: the transmission kernel k, or
/// the next-generation kernel k(x,y)/gamma(y).
enum class KernelChoice { Transmission, NextGen };

/// Discrete action of T_{kernel*eta} on g:
///   result[i] = sum_j kernel(i,j) * eta[j] * g[j] * mu[j].
Vec apply_kernel(const Model& model, KernelChoice choice, const Vec& g, const Strategy& eta);

/// Effective next-generation matrix M[i][j] = k(i,j) * eta(j) * mu(j) / gamma(j).
/// Its spectral radius is R_e(eta); with eta = 1 it is the plain
/// next-generation matrix and the radius is R0.
struct NextGenMatrix {
    Matrix entries;
};

NextGenMatrix next_gen_matrix(const Model& model, const Strategy& eta);

/// Spectral radius with a Perron certificate. Both eigenvectors are
/// nonnegative and normalized to sum 1 whenever rho > 0, with residuals
///   ||M v - rho v||_inf  and  ||M^T u - rho u||_inf  <= tol * max(1, rho).
struct SpectralResult {
    double rho = 0.0;
    Vec right, left;
    double right_residual = 0.0;
    double left_residual = 0.0;
    std::size_t iterations = 0;
};

/// Power iteration on M + delta*I with delta = max-row-sum/2; the shift
/// breaks periodicity and rho(M + delta I) = rho(M) + delta exactly for
/// nonnegative M, so no irreducibility is assumed. Matrices with acyclic
/// support are nilpotent and short-circuit to rho = 0 with an exact
/// certificate. Deterministic: fixed uniform start vector.
/// Throws SolverError if the iteration cap (100*n*ceil(-log10 tol)) is hit,
/// which signals a defective dominant eigenvalue or similar pathology.
SpectralResult spectral_radius(const NextGenMatrix& m, double tol = 1e-10);

/// R_e(eta) = rho(T_{k eta / gamma}).
double r_e(const Model& model, const Strategy& eta, double tol = 1e-10);

/// R0 = R_e(1).
double r0(const Model& model, double tol = 1e-10);

}  // namespace sis

#endif
