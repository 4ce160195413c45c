#include "sis/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sis/dynamics.hpp"
#include "sis/spectral.hpp"

namespace sis {

Outcome evaluate(const Model& model, const Strategy& eta, LossKind loss_kind,
                 const Tolerances& tol) {
    Outcome o;
    o.cost = cost(model, eta);
    o.loss = loss_kind == LossKind::Re ? r_e(model, eta, tol.spectral)
                                       : infected_fraction(model, eta, tol.equilibrium);
    o.eta = eta.eta();
    o.loss_kind = loss_kind;
    return o;
}

std::vector<Outcome> enumerate_outcomes(const Model& model, LossKind loss_kind, std::size_t m,
                                        const Tolerances& tol, unsigned workers,
                                        std::uint64_t budget) {
    if (m < 1) throw InputError("grid resolution m must be >= 1");
    const std::size_t n = model.size();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (total > budget / (m + 1)) { total = budget + 1; break; }
        total *= m + 1;
    }
    if (total > budget)
        throw BudgetError("grid has more than " + std::to_string(budget) +
                          " points; reduce the model or lower m");

    std::vector<Outcome> out(static_cast<std::size_t>(total));
    auto eval_range = [&](std::uint64_t begin, std::uint64_t end) {
        Vec eta(n);
        for (std::uint64_t g = begin; g < end; ++g) {
            std::uint64_t rest = g;
            for (std::size_t c = n; c-- > 0;) {
                eta[c] = static_cast<double>(rest % (m + 1)) / static_cast<double>(m);
                rest /= m + 1;
            }
            out[static_cast<std::size_t>(g)] = evaluate(model, Strategy(eta), loss_kind, tol);
        }
    };

    if (workers <= 1) {
        eval_range(0, total);
        return out;
    }
    std::vector<std::thread> pool;
    std::uint64_t chunk = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::uint64_t begin = w * chunk;
        std::uint64_t end = std::min<std::uint64_t>(total, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(eval_range, begin, end);
    }
    for (auto& t : pool) t.join();
    return out;
}

namespace {

bool eta_less(const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Strictly-dominance-minimal points of (x, y); ties on both coordinates
/// keep one witness (lexicographically smallest eta).
std::vector<Outcome> sweep_min(std::vector<Outcome> pts,
                               const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        if (y[a] != y[b]) return y[a] < y[b];
        return eta_less(pts[a].eta, pts[b].eta);
    });

    std::vector<Outcome> kept;
    double last_x = 0.0, last_y = 0.0;
    for (std::size_t idx : order) {
        if (kept.empty()) {
            kept.push_back(pts[idx]);
            last_x = x[idx];
            last_y = y[idx];
            continue;
        }
        if (x[idx] == last_x) continue;      // same x, y >= kept: dominated or duplicate
        if (y[idx] >= last_y) continue;      // x strictly larger, y no better: dominated
        kept.push_back(pts[idx]);
        last_x = x[idx];
        last_y = y[idx];
    }
    return kept;
}

}  // namespace

Frontier frontier(const std::vector<Outcome>& outcomes, FrontierKind kind) {
    if (outcomes.empty()) throw InputError("frontier of an empty outcome list");

    std::vector<double> x(outcomes.size()), y(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        double sx = outcomes[i].cost, sy = outcomes[i].loss;
        if (kind == FrontierKind::AntiPareto) { sx = -sx; sy = -sy; }
        x[i] = sx;
        y[i] = sy;
    }
    Frontier f;
    f.kind = kind;
    f.loss_kind = outcomes[0].loss_kind;
    f.points = sweep_min(outcomes, x, y);
    if (kind == FrontierKind::AntiPareto)
        std::reverse(f.points.begin(), f.points.end()); // back to cost ascending
    return f;
}

Frontier polish_frontier(const Model& model, const Frontier& f, const Tolerances& tol) {
    if (f.grid_resolution == 0)
        throw InputError("polish needs a grid-based frontier (grid_resolution > 0)");
    const double step =
        1.0 / (static_cast<double>(f.grid_resolution) * static_cast<double>(f.grid_resolution));
    auto dominates = [&](const Outcome& a, const Outcome& b) {
        bool le_c = f.kind == FrontierKind::Pareto ? a.cost <= b.cost : a.cost >= b.cost;
        bool le_l = f.kind == FrontierKind::Pareto ? a.loss <= b.loss : a.loss >= b.loss;
        return le_c && le_l && (a.cost != b.cost || a.loss != b.loss);
    };

    std::vector<Outcome> polished_points;
    for (const Outcome& start : f.points) {
        Outcome cur = start;
        for (int pass = 0; pass < 20; ++pass) {
            bool moved = false;
            for (std::size_t i = 0; i < cur.eta.size(); ++i) {
                for (double direction : {-1.0, 1.0}) {
                    Vec eta = cur.eta;
                    eta[i] = std::min(1.0, std::max(0.0, eta[i] + direction * step));
                    if (eta[i] == cur.eta[i]) continue;
                    Outcome candidate = evaluate(model, Strategy(eta), f.loss_kind, tol);
                    if (dominates(candidate, cur)) {
                        cur = candidate;
                        moved = true;
                    }
                }
            }
            if (!moved) break;
        }
        polished_points.push_back(std::move(cur));
    }
    Frontier out = frontier(polished_points, f.kind);
    out.grid_resolution = f.grid_resolution;
    out.polished = true;
    return out;
}

FrontierComparison compare_frontiers(const Frontier& f1, const Frontier& f2, double tol) {
    if (f1.kind != f2.kind) throw InputError("cannot compare frontiers of different kinds");
    if (f1.loss_kind != f2.loss_kind)
        throw InputError("cannot compare frontiers with different loss kinds");
    if (f1.points.empty() || f2.points.empty())
        throw InputError("cannot compare empty frontiers");

    auto dist = [](const Outcome& a, const Outcome& b) {
        return std::hypot(a.cost - b.cost, a.loss - b.loss);
    };
    FrontierComparison cmp;
    auto directed = [&](const Frontier& a, const Frontier& b, bool a_is_first) {
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            double best = 0.0;
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < b.points.size(); ++j) {
                double d = dist(a.points[i], b.points[j]);
                if (j == 0 || d < best) { best = d; best_j = j; }
            }
            if (best > cmp.hausdorff) {
                cmp.hausdorff = best;
                cmp.witness_a = a_is_first ? i : best_j;
                cmp.witness_b = a_is_first ? best_j : i;
            }
        }
    };
    directed(f1, f2, true);
    directed(f2, f1, false);
    cmp.equal = cmp.hausdorff <= tol;
    return cmp;
}

std::string frontier_to_csv(const Frontier& f) {
    std::size_t n = f.points.empty() ? 0 : f.points[0].eta.size();
    std::string out = "cost,loss";
    for (std::size_t i = 0; i < n; ++i) out += ",eta_" + std::to_string(i);
    out += "\n";
    for (const Outcome& p : f.points) {
        out += format_double(p.cost);
        out += ",";
        out += format_double(p.loss);
        for (double e : p.eta) {
            out += ",";
            out += format_double(e);
        }
        out += "\n";
    }
    return out;
}

}  // namespace sis
