#include "sis/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "json.hpp"

namespace sis {

std::size_t FeaturePartition::element_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
}

std::vector<std::size_t> FeaturePartition::block_of() const {
    std::size_t n = 0;
    for (const auto& b : blocks) {
        if (b.empty()) throw InputError("partition contains an empty block");
        for (std::size_t i : b) n = std::max(n, i + 1);
    }
    std::vector<std::size_t> map(n, SIZE_MAX);
    for (std::size_t c = 0; c < blocks.size(); ++c)
        for (std::size_t i : blocks[c]) {
            if (i >= n || map[i] != SIZE_MAX)
                throw InputError("partition blocks overlap at index " + std::to_string(i));
            map[i] = c;
        }
    for (std::size_t i = 0; i < n; ++i)
        if (map[i] == SIZE_MAX)
            throw InputError("partition does not cover index " + std::to_string(i));
    return map;
}

namespace {

/// Features i and j can share a block: gamma, cost and the full kernel row
/// and column agree within tol.
bool mergeable(const Model& m, std::size_t i, std::size_t j, double tol) {
    if (std::abs(m.gamma()[i] - m.gamma()[j]) > tol) return false;
    if (std::abs(m.cost_density()[i] - m.cost_density()[j]) > tol) return false;
    for (std::size_t a = 0; a < m.size(); ++a) {
        if (std::abs(m.kernel()(i, a) - m.kernel()(j, a)) > tol) return false;
        if (std::abs(m.kernel()(a, i) - m.kernel()(a, j)) > tol) return false;
    }
    return true;
}

FeaturePartition greedy_partition(const Model& model, double tol) {
    FeaturePartition p;
    for (std::size_t i = 0; i < model.size(); ++i) {
        bool placed = false;
        for (auto& block : p.blocks) {
            bool fits = true;
            for (std::size_t m : block)
                if (!mergeable(model, i, m, tol)) { fits = false; break; }
            if (fits) {
                block.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) p.blocks.push_back({i});
    }
    return p;
}

struct Violation {
    bool found = false;
    std::size_t block_a = 0, block_b = 0;
    std::string quantity;
    double deviation = 0.0;
};

/// Largest deviation from block-constancy; blocks are checked pairwise and
/// the kernel jointly in both arguments.
Violation worst_violation(const Model& m, const FeaturePartition& p) {
    Violation v;
    auto record = [&](std::size_t a, std::size_t b, const char* q, double dev) {
        if (dev > v.deviation) {
            v.found = true;
            v.block_a = a;
            v.block_b = b;
            v.quantity = q;
            v.deviation = dev;
        }
    };
    for (std::size_t c = 0; c < p.blocks.size(); ++c) {
        const auto& block = p.blocks[c];
        for (std::size_t x : block)
            for (std::size_t y : block) {
                record(c, c, "gamma", std::abs(m.gamma()[x] - m.gamma()[y]));
                record(c, c, "cost", std::abs(m.cost_density()[x] - m.cost_density()[y]));
            }
    }
    for (std::size_t a = 0; a < p.blocks.size(); ++a)
        for (std::size_t b = 0; b < p.blocks.size(); ++b)
            for (std::size_t i : p.blocks[a])
                for (std::size_t i2 : p.blocks[a])
                    for (std::size_t j : p.blocks[b])
                        for (std::size_t j2 : p.blocks[b])
                            record(a, b, "kernel",
                                   std::abs(m.kernel()(i, j) - m.kernel()(i2, j2)));
    return v;
}

}  // namespace

FeaturePartition coarsest_reduction(const Model& model, double tol) {
    if (tol < 0.0) throw InputError("reduction tolerance must be nonnegative");
    // Greedy merging bounds row/column deviations by tol but joint kernel
    // deviations only by 2*tol; if a borderline input trips that, retry
    // with a tighter merge tolerance (reaches singletons in the limit).
    double merge_tol = tol;
    for (;;) {
        FeaturePartition p = greedy_partition(model, merge_tol);
        Violation v = worst_violation(model, p);
        if (!v.found || v.deviation <= tol) return p;
        merge_tol /= 2.0;
    }
}

std::vector<NearMerge> find_near_merges(const Model& model, const FeaturePartition& p,
                                        double tol) {
    std::vector<NearMerge> out;
    for (std::size_t a = 0; a < p.blocks.size(); ++a)
        for (std::size_t b = a + 1; b < p.blocks.size(); ++b) {
            // Deviation the merged partition would introduce.
            FeaturePartition merged;
            merged.blocks.push_back(p.blocks[a]);
            for (std::size_t i : p.blocks[b]) merged.blocks[0].push_back(i);
            for (std::size_t c = 0; c < p.blocks.size(); ++c)
                if (c != a && c != b) merged.blocks.push_back(p.blocks[c]);
            Violation v = worst_violation(model, merged);
            if (v.found && v.deviation > tol && v.deviation < 10.0 * tol)
                out.push_back({a, b, v.quantity, v.deviation});
        }
    return out;
}

std::pair<Model, Coupling> reduce(const Model& model, const FeaturePartition& p, double tol) {
    auto block_map = p.block_of();
    check_dimension(block_map.size(), model.size(), "partition");

    Violation v = worst_violation(model, p);
    if (v.found && v.deviation > tol)
        throw InputError("partition is not reduction-valid: " + v.quantity + " deviates by " +
                         format_double(v.deviation) + " between blocks " +
                         std::to_string(v.block_a) + " and " + std::to_string(v.block_b));

    const std::size_t nb = p.block_count();
    ModelData data;
    data.weights.assign(nb, 0.0);
    data.gamma.assign(nb, 0.0);
    data.cost_density.assign(nb, 0.0);
    data.kernel = Matrix(nb, nb, 0.0);

    // Exact-match fast path: blocks of literally equal values take the value
    // itself, so exact duplicates reduce bit-exactly. Tolerance-level
    // variation falls back to the mu-weighted mean (the conditional
    // expectation).
    for (std::size_t b = 0; b < nb; ++b) {
        double mass = 0.0, g = 0.0, c = 0.0;
        bool g_exact = true, c_exact = true;
        const std::size_t first = p.blocks[b][0];
        for (std::size_t i : p.blocks[b]) {
            mass += model.weights()[i];
            g += model.gamma()[i] * model.weights()[i];
            c += model.cost_density()[i] * model.weights()[i];
            g_exact = g_exact && model.gamma()[i] == model.gamma()[first];
            c_exact = c_exact && model.cost_density()[i] == model.cost_density()[first];
        }
        data.weights[b] = mass;
        data.gamma[b] = g_exact ? model.gamma()[first] : g / mass;
        data.cost_density[b] = c_exact ? model.cost_density()[first] : c / mass;
    }
    for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            double s = 0.0;
            bool exact = true;
            const double first = model.kernel()(p.blocks[a][0], p.blocks[b][0]);
            for (std::size_t i : p.blocks[a])
                for (std::size_t j : p.blocks[b]) {
                    s += model.kernel()(i, j) * model.weights()[i] * model.weights()[j];
                    exact = exact && model.kernel()(i, j) == first;
                }
            data.kernel(a, b) = exact ? first : s / (data.weights[a] * data.weights[b]);
        }
    if (!model.labels().empty()) {
        for (const auto& block : p.blocks) {
            std::string label;
            for (std::size_t i : block) {
                if (!label.empty()) label += "+";
                label += model.labels()[i];
            }
            data.labels.push_back(label);
        }
    }

    Model reduced = Model::create(std::move(data));
    Coupling coupling = deterministic_coupling(model, reduced, block_map);
    return {std::move(reduced), std::move(coupling)};
}

Strategy reduce_strategy(const Model& model, const FeaturePartition& p, const Strategy& eta) {
    auto block_map = p.block_of();
    check_dimension(block_map.size(), model.size(), "partition");
    check_dimension(eta.size(), model.size(), "strategy");

    Vec out(p.block_count(), 0.0);
    for (std::size_t b = 0; b < p.block_count(); ++b) {
        double mass = 0.0, s = 0.0;
        for (std::size_t i : p.blocks[b]) {
            mass += model.weights()[i];
            s += eta[i] * model.weights()[i];
        }
        out[b] = s / mass;
    }
    return Strategy(std::move(out));
}

Strategy lift_strategy(const FeaturePartition& p, const Strategy& eta_red) {
    check_dimension(eta_red.size(), p.block_count(), "reduced strategy");
    auto block_map = p.block_of();
    Vec out(block_map.size(), 0.0);
    for (std::size_t i = 0; i < block_map.size(); ++i) out[i] = eta_red[block_map[i]];
    return Strategy(std::move(out));
}

// --- files -------------------------------------------------------------------

FeaturePartition partition_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InputError("malformed JSON");
    if (!j.is_object()) throw InputError("expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "blocks") throw InputError("unknown key \"" + it.key() + "\"");
    if (!j.contains("blocks")) throw InputError("missing key \"blocks\"");
    const auto& bs = j.at("blocks");
    if (!bs.is_array()) throw InputError("\"blocks\" must be an array of arrays");

    FeaturePartition p;
    for (const auto& b : bs) {
        if (!b.is_array()) throw InputError("\"blocks\" must be an array of arrays");
        std::vector<std::size_t> block;
        for (const auto& x : b) {
            if (!x.is_number_unsigned())
                throw InputError("\"blocks\" must contain nonnegative integers");
            block.push_back(x.get<std::size_t>());
        }
        std::sort(block.begin(), block.end());
        p.blocks.push_back(std::move(block));
    }
    p.block_of(); // shape check: disjoint, nonempty, contiguous coverage
    return p;
}

std::string partition_to_json(const FeaturePartition& p) {
    std::string out = "{\"blocks\": [";
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        if (b) out += ", ";
        out += "[";
        for (std::size_t i = 0; i < p.blocks[b].size(); ++i) {
            if (i) out += ", ";
            out += std::to_string(p.blocks[b][i]);
        }
        out += "]";
    }
    out += "]}\n";
    return out;
}

}  // namespace sis
