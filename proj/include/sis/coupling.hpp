#ifndef SIS_COUPLING_HPP
#define SIS_COUPLING_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "sis/model.hpp"
#include "sis/types.hpp"

namespace sis {

/// A connected component of the coupling's support graph. The components
/// are the atoms of the common-information sigma-field of the two coupled
/// coordinates: everything either side can deduce about the other.
struct Component {
    std::vector<std::size_t> left;  ///< sorted indices on space 1
    std::vector<std::size_t> right; ///< sorted indices on space 2
    double mass = 0.0;              ///< total pi-mass of the component
    double left_mass = 0.0;         ///< sum of left marginal over `left`
    double right_mass = 0.0;        ///< sum of right marginal over `right`
};

/// Joint mass matrix pi on {0..n1-1} x {0..n2-1} with prescribed marginals,
/// plus the component partition of its support. Immutable once built.
struct Coupling {
    Matrix pi;
    Vec left_marginal, right_marginal;
    std::vector<Component> components;
    std::vector<std::size_t> left_component, right_component; ///< index -> component

    std::size_t left_size() const { return left_marginal.size(); }
    std::size_t right_size() const { return right_marginal.size(); }
};

enum class Side { Left, Right };

/// Builds a coupling and its component partition (union-find over support
/// edges, support meaning pi(i,j) > support_eps; the default 0 is the exact
/// semantics). Marginals must match the models' weights within 1e-9.
Coupling build_coupling(const Model& model1, const Model& model2, const Matrix& pi,
                        double support_eps = 0.0);

/// Same, but the marginals are taken from pi itself (row and column sums).
/// Every row and column must carry positive mass.
Coupling coupling_from_pi(const Matrix& pi, double support_eps = 0.0);

/// Coupling induced by a map phi: left index -> right index that pushes the
/// left weights forward to the right weights: pi[i][phi(i)] = mu1[i].
Coupling deterministic_coupling(const Model& model1, const Model& model2,
                                const std::vector<std::size_t>& phi);

/// Conjugate of f (a function on `side`) : the conditional expectation of
/// f given the component, read on the other side. Component-constant by
/// construction.
Vec conjugate(const Coupling& c, const Vec& f, Side side);

/// True iff f1 (on the left) and f2 (on the right) agree on every support
/// edge of pi within tol — the characterization f1(Z1) = f2(Z2) a.s.
bool is_conjugate(const Coupling& c, const Vec& f1, const Vec& f2, double tol = 1e-10);

/// Definitional route: f1 == conjugate(f2) and f2 == conjugate(f1) within
/// tol. Equivalent to is_conjugate up to tolerance semantics; kept separate
/// so the two routes can be cross-checked.
bool is_conjugate_definitional(const Coupling& c, const Vec& f1, const Vec& f2,
                               double tol = 1e-10);

/// True iff the pair of conjugates (f2*, f1*) is conjugate, i.e. f1 and f2
/// have equal conditional means on every component.
bool is_preconjugate(const Coupling& c, const Vec& f1, const Vec& f2, double tol = 1e-10);

/// The product coupling on pairs, used to conjugate kernels. Extended
/// components are ordered pairs of base components; the n^2 x n^2 support
/// graph is never materialized.
struct ExtendedCoupling {
    Coupling base;
};

ExtendedCoupling extend(const Coupling& c);

/// Conjugate of a kernel K on `side`: on the extended component (A,B) the
/// value is the pi x pi - conditional mean of K over A x B, assigned to
/// every pair of the opposite sides.
Matrix kernel_conjugate(const ExtendedCoupling& e, const Matrix& k, Side side);

/// Kernel analogue of is_conjugate: K1(i,j) must agree with K2(i',j')
/// whenever (i,i') and (j,j') are both support edges.
bool is_kernel_conjugate(const Coupling& c, const Matrix& k1, const Matrix& k2,
                         double tol = 1e-10);

/// One check of a conjugate-parameter hypothesis, with the largest
/// violation and where it was found.
struct ConjugacyCheck {
    bool ok = false;
    double max_violation = 0.0;
    // offending indices; for kernels these are (i,j) on the left and
    // (i2,j2) on the right, for functions only i / i2 are meaningful.
    std::size_t i = 0, j = 0, i2 = 0, j2 = 0;
};

/// The four conjugacy checks under which coupled models are equivalent:
/// gamma, cost density, transmission kernel (extended) and next-generation
/// kernel k/gamma (extended).
struct ConjugacyReport {
    ConjugacyCheck gamma, cost, kernel, ngo_kernel;
    bool all_ok() const { return gamma.ok && cost.ok && kernel.ok && ngo_kernel.ok; }
};

ConjugacyReport check_model_conjugacy(const Coupling& c, const Model& model1,
                                      const Model& model2, double tol = 1e-10);

// --- coupling files ----------------------------------------------------------

/// {"pi": [[..], ..]}
Matrix coupling_pi_from_json(const std::string& text);
/// {"phi": [j0, j1, ..]}
std::vector<std::size_t> coupling_phi_from_json(const std::string& text);

std::string coupling_phi_to_json(const std::vector<std::size_t>& phi);
std::string coupling_pi_to_json(const Matrix& pi);

}  // namespace sis

#endif
