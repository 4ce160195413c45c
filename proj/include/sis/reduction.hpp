#ifndef SIS_REDUCTION_HPP
#define SIS_REDUCTION_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sis/coupling.hpp"
#include "sis/model.hpp"
#include "sis/types.hpp"

namespace sis {

/// Partition of the feature indices; the blocks are the atoms of a
/// sub-sigma-field on which the model parameters are measurable.
struct FeaturePartition {
    std::vector<std::vector<std::size_t>> blocks; ///< disjoint, sorted, cover 0..n-1

    std::size_t block_count() const { return blocks.size(); }
    std::size_t element_count() const;
    /// index -> block id
    std::vector<std::size_t> block_of() const;
};

/// Coarsest partition with gamma and cost block-constant and the kernel
/// block-constant in both arguments jointly (within tol). Blocks are ordered
/// by smallest contained index, so the result is deterministic.
FeaturePartition coarsest_reduction(const Model& model, double tol = 1e-9);

/// Two blocks that failed to merge by less than 10*tol on some quantity;
/// surfaced as a diagnostic for hand-built models.
struct NearMerge {
    std::size_t block_a = 0, block_b = 0;
    std::string quantity; ///< "gamma", "cost" or "kernel"
    double deviation = 0.0;
};

std::vector<NearMerge> find_near_merges(const Model& model, const FeaturePartition& p,
                                        double tol = 1e-9);

/// Merges each block into one feature (weights summed, parameters averaged
/// under mu — exact when the partition is valid) and returns the reduced
/// model together with the deterministic coupling along the quotient map.
/// Throws InputError if the partition is not reduction-valid, naming the
/// offending blocks and quantity.
std::pair<Model, Coupling> reduce(const Model& model, const FeaturePartition& p,
                                  double tol = 1e-9);

/// Conditional expectation of eta given the partition: per-block
/// mu-weighted mean.
Strategy reduce_strategy(const Model& model, const FeaturePartition& p, const Strategy& eta);

/// Lift of a reduced strategy: constant on each block (the conjugate, not
/// merely pre-conjugate, lift).
Strategy lift_strategy(const FeaturePartition& p, const Strategy& eta_red);

// --- partition files ---------------------------------------------------------

/// {"blocks": [[..], ..]}
FeaturePartition partition_from_json(const std::string& text);
std::string partition_to_json(const FeaturePartition& p);

}  // namespace sis

#endif
