#ifndef SIS_PARETO_HPP
#define SIS_PARETO_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sis/model.hpp"
#include "sis/types.hpp"

namespace sis {

/// Which loss the bi-objective minimization uses: the effective
/// reproduction number or the equilibrium infected fraction.
enum class LossKind { Re, InfectedFraction };

struct Outcome {
    double cost = 0.0;
    double loss = 0.0;
    Vec eta;
    LossKind loss_kind = LossKind::Re;
};

enum class FrontierKind { Pareto, AntiPareto };

/// Non-dominated outcomes, sorted by cost ascending. The loss strictly
/// decreases along increasing cost on both kinds (a retained point below
/// another in both coordinates would be dominated under the mirrored
/// order too).
struct Frontier {
    FrontierKind kind = FrontierKind::Pareto;
    LossKind loss_kind = LossKind::Re;
    std::vector<Outcome> points;
    std::size_t grid_resolution = 0; ///< m of the grid {0, 1/m, .., 1}^n; 0 if ad hoc
    bool polished = false;           ///< a local refinement pass ran (plots only)
};

struct Tolerances {
    double spectral = 1e-10;
    double equilibrium = 1e-10;
};

Outcome evaluate(const Model& model, const Strategy& eta, LossKind loss_kind,
                 const Tolerances& tol = {});

/// All outcomes for eta on the grid {0, 1/m, .., 1}^n in lexicographic
/// order (last coordinate fastest). Throws BudgetError if (m+1)^n exceeds
/// the budget. Embarrassingly parallel over grid points; the result is
/// identical for any worker count.
std::vector<Outcome> enumerate_outcomes(const Model& model, LossKind loss_kind,
                                        std::size_t m, const Tolerances& tol = {},
                                        unsigned workers = 1,
                                        std::uint64_t budget = 1000000);

/// Dominance filter. Ties on (cost, loss) keep the lexicographically
/// smallest strategy; dominance is strict in one coordinate, per the
/// definition of (anti-)Pareto optimality.
Frontier frontier(const std::vector<Outcome>& outcomes, FrontierKind kind);

/// Local coordinate-descent pass over the frontier strategies with step
/// 1/m^2, accepting only dominating moves, then a re-filter. Tightens the
/// gaps between grid points for plotting; off by default everywhere and
/// never used by equality tests. The result is marked `polished`.
Frontier polish_frontier(const Model& model, const Frontier& f, const Tolerances& tol = {});

struct FrontierComparison {
    bool equal = false;
    double hausdorff = 0.0;
    // farthest pair: point index in one frontier and its nearest in the other
    std::size_t witness_a = 0, witness_b = 0;
};

/// Hausdorff distance between the two frontiers' point sets in the
/// (cost, loss) plane (Euclidean). Only meaningful for frontiers computed
/// on corresponding strategy sets (e.g. a grid and its lift along a
/// coupling); kinds must match.
FrontierComparison compare_frontiers(const Frontier& f1, const Frontier& f2,
                                     double tol = 1e-8);

/// CSV "cost,loss,eta_0,..,eta_{n-1}", rows by cost ascending, 17
/// significant digits.
std::string frontier_to_csv(const Frontier& f);

}  // namespace sis

#endif
