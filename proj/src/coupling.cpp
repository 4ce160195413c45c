#include "sis/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "json.hpp"

namespace sis {

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

/// Components of the support bipartite graph; right node j is n1 + j.
std::vector<Component> find_components(const Matrix& pi, const Vec& left, const Vec& right,
                                       double support_eps,
                                       std::vector<std::size_t>& left_comp,
                                       std::vector<std::size_t>& right_comp) {
    const std::size_t n1 = pi.rows(), n2 = pi.cols();
    UnionFind uf(n1 + n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            if (pi(i, j) > support_eps) uf.unite(i, n1 + j);

    // Components keyed by root, ordered by smallest contained left index.
    std::vector<std::size_t> root_to_comp(n1 + n2, SIZE_MAX);
    std::vector<Component> comps;
    for (std::size_t i = 0; i < n1; ++i) {
        std::size_t r = uf.find(i);
        if (root_to_comp[r] == SIZE_MAX) {
            root_to_comp[r] = comps.size();
            comps.emplace_back();
        }
        comps[root_to_comp[r]].left.push_back(i);
    }
    for (std::size_t j = 0; j < n2; ++j) {
        std::size_t r = uf.find(n1 + j);
        if (root_to_comp[r] == SIZE_MAX)
            throw InputError("coupling column " + std::to_string(j) +
                             " carries no support; every feature needs positive mass");
        comps[root_to_comp[r]].right.push_back(j);
    }
    left_comp.assign(n1, 0);
    right_comp.assign(n2, 0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        if (comps[c].right.empty())
            throw InputError("coupling row " + std::to_string(comps[c].left[0]) +
                             " carries no support; every feature needs positive mass");
        for (std::size_t i : comps[c].left) {
            left_comp[i] = c;
            comps[c].left_mass += left[i];
        }
        for (std::size_t j : comps[c].right) {
            right_comp[j] = c;
            comps[c].right_mass += right[j];
        }
        for (std::size_t i : comps[c].left)
            for (std::size_t j : comps[c].right) comps[c].mass += pi(i, j);
    }
    return comps;
}

Coupling assemble(const Matrix& pi, Vec left, Vec right, double support_eps) {
    Coupling c;
    c.pi = pi;
    c.left_marginal = std::move(left);
    c.right_marginal = std::move(right);
    c.components = find_components(c.pi, c.left_marginal, c.right_marginal, support_eps,
                                   c.left_component, c.right_component);
    return c;
}

void check_nonnegative(const Matrix& pi) {
    for (std::size_t i = 0; i < pi.rows(); ++i)
        for (std::size_t j = 0; j < pi.cols(); ++j)
            if (!(pi(i, j) >= 0.0))
                throw InputError("pi[" + std::to_string(i) + "][" + std::to_string(j) +
                                 "] is negative or not finite");
}

}  // namespace

Coupling build_coupling(const Model& model1, const Model& model2, const Matrix& pi,
                        double support_eps) {
    check_dimension(pi.rows(), model1.size(), "pi rows");
    check_dimension(pi.cols(), model2.size(), "pi columns");
    check_nonnegative(pi);

    double worst = 0.0;
    std::size_t worst_index = 0;
    bool worst_is_row = true;
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < pi.cols(); ++j) s += pi(i, j);
        double dev = std::abs(s - model1.weights()[i]);
        if (dev > worst) { worst = dev; worst_index = i; worst_is_row = true; }
    }
    for (std::size_t j = 0; j < pi.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < pi.rows(); ++i) s += pi(i, j);
        double dev = std::abs(s - model2.weights()[j]);
        if (dev > worst) { worst = dev; worst_index = j; worst_is_row = false; }
    }
    if (worst > 1e-9)
        throw InputError(std::string("coupling marginal mismatch: ") +
                         (worst_is_row ? "row " : "column ") + std::to_string(worst_index) +
                         " deviates by " + format_double(worst));

    return assemble(pi, model1.weights(), model2.weights(), support_eps);
}

Coupling coupling_from_pi(const Matrix& pi, double support_eps) {
    check_nonnegative(pi);
    Vec left(pi.rows(), 0.0), right(pi.cols(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < pi.rows(); ++i)
        for (std::size_t j = 0; j < pi.cols(); ++j) {
            left[i] += pi(i, j);
            right[j] += pi(i, j);
            total += pi(i, j);
        }
    if (std::abs(total - 1.0) > 1e-9)
        throw InputError("pi has total mass " + format_double(total) + " != 1");
    for (std::size_t i = 0; i < left.size(); ++i)
        if (left[i] <= 0.0)
            throw InputError("pi row " + std::to_string(i) + " has zero mass");
    for (std::size_t j = 0; j < right.size(); ++j)
        if (right[j] <= 0.0)
            throw InputError("pi column " + std::to_string(j) + " has zero mass");
    return assemble(pi, std::move(left), std::move(right), support_eps);
}

Coupling deterministic_coupling(const Model& model1, const Model& model2,
                                const std::vector<std::size_t>& phi) {
    const std::size_t n1 = model1.size(), n2 = model2.size();
    check_dimension(phi.size(), n1, "phi");
    for (std::size_t i = 0; i < n1; ++i)
        if (phi[i] >= n2)
            throw InputError("phi[" + std::to_string(i) + "] = " + std::to_string(phi[i]) +
                             " out of range");

    Vec push(n2, 0.0);
    for (std::size_t i = 0; i < n1; ++i) push[phi[i]] += model1.weights()[i];
    for (std::size_t j = 0; j < n2; ++j)
        if (std::abs(push[j] - model2.weights()[j]) > 1e-9)
            throw InputError("phi does not push the left weights to the right weights: image " +
                             std::to_string(j) + " receives " + format_double(push[j]) +
                             ", expected " + format_double(model2.weights()[j]));

    Matrix pi(n1, n2, 0.0);
    for (std::size_t i = 0; i < n1; ++i) pi(i, phi[i]) = model1.weights()[i];
    return assemble(pi, model1.weights(), model2.weights(), 0.0);
}

Vec conjugate(const Coupling& c, const Vec& f, Side side) {
    const bool from_left = side == Side::Left;
    check_dimension(f.size(), from_left ? c.left_size() : c.right_size(), "f");
    Vec out(from_left ? c.right_size() : c.left_size(), 0.0);
    for (const Component& k : c.components) {
        const auto& source = from_left ? k.left : k.right;
        const auto& target = from_left ? k.right : k.left;
        const Vec& source_w = from_left ? c.left_marginal : c.right_marginal;
        double mass = from_left ? k.left_mass : k.right_mass;
        double s = 0.0;
        for (std::size_t i : source) s += f[i] * source_w[i];
        double value = s / mass;
        for (std::size_t j : target) out[j] = value;
    }
    return out;
}

bool is_conjugate(const Coupling& c, const Vec& f1, const Vec& f2, double tol) {
    check_dimension(f1.size(), c.left_size(), "f1");
    check_dimension(f2.size(), c.right_size(), "f2");
    for (std::size_t i = 0; i < c.left_size(); ++i)
        for (std::size_t j = 0; j < c.right_size(); ++j)
            if (c.pi(i, j) > 0.0 && std::abs(f1[i] - f2[j]) > tol) return false;
    return true;
}

bool is_conjugate_definitional(const Coupling& c, const Vec& f1, const Vec& f2, double tol) {
    Vec f1_star = conjugate(c, f1, Side::Left);
    Vec f2_star = conjugate(c, f2, Side::Right);
    return linf_diff(f1, f2_star) <= tol && linf_diff(f2, f1_star) <= tol;
}

bool is_preconjugate(const Coupling& c, const Vec& f1, const Vec& f2, double tol) {
    Vec f1_star = conjugate(c, f1, Side::Left);   // on the right space
    Vec f2_star = conjugate(c, f2, Side::Right);  // on the left space
    return is_conjugate(c, f2_star, f1_star, tol);
}

ExtendedCoupling extend(const Coupling& c) { return ExtendedCoupling{c}; }

Matrix kernel_conjugate(const ExtendedCoupling& e, const Matrix& k, Side side) {
    const Coupling& c = e.base;
    const bool from_left = side == Side::Left;
    const std::size_t ns = from_left ? c.left_size() : c.right_size();
    const std::size_t nt = from_left ? c.right_size() : c.left_size();
    if (k.rows() != ns || k.cols() != ns)
        throw InputError("kernel has the wrong dimension for its side");

    Matrix out(nt, nt, 0.0);
    const Vec& w = from_left ? c.left_marginal : c.right_marginal;
    // Extended components are ordered pairs (A,B) of base components; the
    // value on (A,B) is the joint-mean of k over the source sides.
    for (const Component& a : c.components) {
        const auto& a_src = from_left ? a.left : a.right;
        const auto& a_tgt = from_left ? a.right : a.left;
        double a_mass = from_left ? a.left_mass : a.right_mass;
        for (const Component& b : c.components) {
            const auto& b_src = from_left ? b.left : b.right;
            const auto& b_tgt = from_left ? b.right : b.left;
            double b_mass = from_left ? b.left_mass : b.right_mass;
            double s = 0.0;
            for (std::size_t i : a_src)
                for (std::size_t j : b_src) s += k(i, j) * w[i] * w[j];
            double value = s / (a_mass * b_mass);
            for (std::size_t i : a_tgt)
                for (std::size_t j : b_tgt) out(i, j) = value;
        }
    }
    return out;
}

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

std::vector<Edge> support_edges(const Coupling& c) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < c.left_size(); ++i)
        for (std::size_t j = 0; j < c.right_size(); ++j)
            if (c.pi(i, j) > 0.0) edges.push_back({i, j});
    return edges;
}

ConjugacyCheck function_check(const Coupling& c, const Vec& f1, const Vec& f2, double tol) {
    ConjugacyCheck check;
    for (const auto& [i, j] : support_edges(c)) {
        double dev = std::abs(f1[i] - f2[j]);
        if (dev > check.max_violation) {
            check.max_violation = dev;
            check.i = i;
            check.i2 = j;
        }
    }
    check.ok = check.max_violation <= tol;
    return check;
}

ConjugacyCheck kernel_check(const Coupling& c, const Matrix& k1, const Matrix& k2, double tol) {
    ConjugacyCheck check;
    auto edges = support_edges(c);
    for (const auto& [i, i2] : edges)
        for (const auto& [j, j2] : edges) {
            double dev = std::abs(k1(i, j) - k2(i2, j2));
            if (dev > check.max_violation) {
                check.max_violation = dev;
                check.i = i;
                check.j = j;
                check.i2 = i2;
                check.j2 = j2;
            }
        }
    check.ok = check.max_violation <= tol;
    return check;
}

}  // namespace

bool is_kernel_conjugate(const Coupling& c, const Matrix& k1, const Matrix& k2, double tol) {
    if (k1.rows() != c.left_size() || k1.cols() != c.left_size() ||
        k2.rows() != c.right_size() || k2.cols() != c.right_size())
        throw InputError("kernel dimensions do not match the coupling");
    return kernel_check(c, k1, k2, tol).ok;
}

ConjugacyReport check_model_conjugacy(const Coupling& c, const Model& model1,
                                      const Model& model2, double tol) {
    check_dimension(c.left_size(), model1.size(), "coupling left side");
    check_dimension(c.right_size(), model2.size(), "coupling right side");

    ConjugacyReport report;
    report.gamma = function_check(c, model1.gamma(), model2.gamma(), tol);
    report.cost = function_check(c, model1.cost_density(), model2.cost_density(), tol);
    report.kernel = kernel_check(c, model1.kernel(), model2.kernel(), tol);

    auto ngo = [](const Model& m) {
        Matrix k(m.size(), m.size());
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j)
                k(i, j) = m.kernel()(i, j) / m.gamma()[j];
        return k;
    };
    report.ngo_kernel = kernel_check(c, ngo(model1), ngo(model2), tol);
    return report;
}

// --- files -------------------------------------------------------------------

namespace {

using nlohmann::json;

json parse_object(const std::string& text, const char* key) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InputError("malformed JSON");
    if (!j.is_object()) throw InputError("expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != key) throw InputError("unknown key \"" + it.key() + "\"");
    if (!j.contains(key)) throw InputError(std::string("missing key \"") + key + "\"");
    return j.at(key);
}

}  // namespace

Matrix coupling_pi_from_json(const std::string& text) {
    json rows = parse_object(text, "pi");
    if (!rows.is_array()) throw InputError("\"pi\" must be an array of arrays");
    std::vector<Vec> data;
    for (const auto& r : rows) {
        if (!r.is_array()) throw InputError("\"pi\" must be an array of arrays");
        Vec row;
        for (const auto& x : r) {
            if (!x.is_number()) throw InputError("\"pi\" must contain numbers only");
            row.push_back(x.get<double>());
        }
        data.push_back(std::move(row));
    }
    if (data.empty()) throw InputError("\"pi\" is empty");
    for (const auto& r : data)
        if (r.size() != data[0].size()) throw InputError("\"pi\" rows have inconsistent lengths");
    return Matrix::from_rows(data);
}

std::vector<std::size_t> coupling_phi_from_json(const std::string& text) {
    json a = parse_object(text, "phi");
    if (!a.is_array()) throw InputError("\"phi\" must be an array of indices");
    std::vector<std::size_t> phi;
    for (const auto& x : a) {
        if (!x.is_number_unsigned()) throw InputError("\"phi\" must contain nonnegative integers");
        phi.push_back(x.get<std::size_t>());
    }
    return phi;
}

std::string coupling_phi_to_json(const std::vector<std::size_t>& phi) {
    std::string out = "{\"phi\": [";
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(phi[i]);
    }
    out += "]}\n";
    return out;
}

std::string coupling_pi_to_json(const Matrix& pi) {
    std::string out = "{\"pi\": [\n";
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        out += "  [";
        for (std::size_t j = 0; j < pi.cols(); ++j) {
            if (j) out += ", ";
            out += format_double(pi(i, j));
        }
        out += (i + 1 < pi.rows()) ? "],\n" : "]\n";
    }
    out += "]}\n";
    return out;
}

}  // namespace sis
