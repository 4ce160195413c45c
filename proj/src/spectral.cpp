#include "sis/spectral.hpp"

#include <cmath>

namespace sis {

Vec apply_kernel(const Model& model, KernelChoice choice, const Vec& g, const Strategy& eta) {
    const std::size_t n = model.size();
    check_dimension(g.size(), n, "g");
    check_dimension(eta.size(), n, "strategy");
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double k = model.kernel()(i, j);
            if (choice == KernelChoice::NextGen) k /= model.gamma()[j];
            s += k * eta[j] * g[j] * model.weights()[j];
        }
        out[i] = s;
    }
    return out;
}

NextGenMatrix next_gen_matrix(const Model& model, const Strategy& eta) {
    const std::size_t n = model.size();
    check_dimension(eta.size(), n, "strategy");
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = model.kernel()(i, j) * eta[j] * model.weights()[j] / model.gamma()[j];
    return NextGenMatrix{std::move(m)};
}

namespace {

/// Acyclic support <=> nilpotent <=> rho = 0. Iterative three-color DFS.
bool support_is_acyclic(const Matrix& m) {
    const std::size_t n = m.rows();
    enum ColorState : unsigned char { White, Gray, Black };
    std::vector<unsigned char> color(n, White);
    std::vector<std::pair<std::size_t, std::size_t>> stack; // (node, next-neighbor)
    for (std::size_t start = 0; start < n; ++start) {
        if (color[start] != White) continue;
        stack.push_back({start, 0});
        color[start] = Gray;
        while (!stack.empty()) {
            std::size_t u = stack.back().first;
            std::size_t next = stack.back().second;
            std::size_t child = n;
            while (next < n) {
                std::size_t v = next++;
                if (m(u, v) <= 0.0) continue;
                if (color[v] == Gray) return false;
                if (color[v] == White) {
                    child = v;
                    break;
                }
            }
            stack.back().second = next;
            if (child < n) {
                color[child] = Gray;
                stack.push_back({child, 0});
            } else if (next >= n) {
                color[u] = Black;
                stack.pop_back();
            }
        }
    }
    return true;
}

/// Exact null-direction certificate for a nilpotent matrix: uniform mass
/// on the zero columns (for M v = 0) or zero rows (for u^T M = 0).
Vec nilpotent_certificate(const Matrix& m, bool right) {
    const std::size_t n = m.rows();
    Vec v(n, 0.0);
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
        bool zero = true;
        for (std::size_t i = 0; i < n && zero; ++i)
            if ((right ? m(i, j) : m(j, i)) > 0.0) zero = false;
        if (zero) { v[j] = 1.0; ++count; }
    }
    if (count == 0) { // unreachable for acyclic support; fall back to uniform
        v.assign(n, 1.0 / static_cast<double>(n));
        return v;
    }
    for (double& x : v) x /= static_cast<double>(count);
    return v;
}

struct OneSided {
    double rho;
    Vec v;
    double residual;
    std::size_t iterations;
};

/// The iteration targets a tolerance two decades tighter than the
/// requested certificate bound, so the returned rho has margin over the
/// residuals measured against it. If the tight target is out of reach
/// within the cap but the requested bound was met along the way, the last
/// such state is returned instead of failing.
OneSided power_iterate(const Matrix& m, double tol, std::size_t cap) {
    const std::size_t n = m.rows();
    const double delta = m.max_row_sum() / 2.0;
    const double tight = tol / 100.0;
    Vec v(n, 1.0 / static_cast<double>(n));
    double lambda_prev = -1.0;
    bool have_fallback = false;
    OneSided fallback{0.0, {}, 0.0, 0};
    for (std::size_t it = 1; it <= cap; ++it) {
        Vec w = m.apply(v);
        for (std::size_t i = 0; i < n; ++i) w[i] += delta * v[i];
        double lambda = sum(w); // = ||A v||_1 since everything is nonnegative
        if (lambda <= 0.0) // A has a positive diagonal here, so this is unreachable
            return {0.0, v, 0.0, it};
        double rho = lambda - delta;
        // A v - lambda v = M v - rho v, so this is the certificate residual.
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            resid = std::max(resid, std::abs(w[i] - lambda * v[i]));
        double step = it > 1 ? std::abs(lambda - lambda_prev) : lambda;
        if (step <= tight * std::max(1.0, lambda) && resid <= tight * std::max(1.0, rho))
            return {std::max(rho, 0.0), v, resid, it};
        if (step <= tol * std::max(1.0, lambda) && resid <= tol * std::max(1.0, rho)) {
            fallback = {std::max(rho, 0.0), v, resid, it};
            have_fallback = true;
        }
        lambda_prev = lambda;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / lambda;
    }
    if (have_fallback) return fallback;
    throw SolverError("power iteration did not converge in " + std::to_string(cap) +
                      " iterations (defective or near-defective dominant eigenvalue)");
}

/// Left pass: iterate on M^T until the residual against the already
/// computed rho meets the bound, so both certificates are consistent with
/// the single returned value.
OneSided power_iterate_fixed(const Matrix& mt, double rho, double tol, std::size_t cap) {
    const std::size_t n = mt.rows();
    const double delta = mt.max_row_sum() / 2.0;
    const double tight = tol / 100.0;
    Vec v(n, 1.0 / static_cast<double>(n));
    bool have_fallback = false;
    OneSided fallback{rho, {}, 0.0, 0};
    for (std::size_t it = 1; it <= cap; ++it) {
        Vec w = mt.apply(v);
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            resid = std::max(resid, std::abs(w[i] - rho * v[i]));
        if (resid <= tight * std::max(1.0, rho))
            return {rho, v, resid, it};
        if (resid <= tol * std::max(1.0, rho) && !have_fallback) {
            fallback = {rho, v, resid, it};
            have_fallback = true;
        }
        double norm = sum(w) + delta; // ||(M^T + delta I) v||_1 with sum v = 1
        for (std::size_t i = 0; i < n; ++i) v[i] = (w[i] + delta * v[i]) / norm;
    }
    if (have_fallback) return fallback;
    throw SolverError("left power iteration did not converge in " + std::to_string(cap) +
                      " iterations");
}

}  // namespace

SpectralResult spectral_radius(const NextGenMatrix& m, double tol) {
    const Matrix& a = m.entries;
    if (a.rows() != a.cols()) throw InputError("next-generation matrix must be square");
    if (tol <= 0.0) throw InputError("spectral tolerance must be positive");
    const std::size_t n = a.rows();

    SpectralResult out;
    if (a.all_zero()) {
        out.right.assign(n, 1.0 / static_cast<double>(n));
        out.left = out.right;
        return out;
    }
    if (support_is_acyclic(a)) {
        out.right = nilpotent_certificate(a, true);
        out.left = nilpotent_certificate(a, false);
        return out;
    }

    const std::size_t cap =
        100 * n * static_cast<std::size_t>(std::ceil(-std::log10(tol / 100.0)));
    OneSided right = power_iterate(a, tol, cap);
    OneSided left = power_iterate_fixed(a.transposed(), right.rho, tol, cap);
    out.rho = right.rho;
    out.right = std::move(right.v);
    out.left = std::move(left.v);
    out.right_residual = right.residual;
    out.left_residual = left.residual;
    out.iterations = std::max(right.iterations, left.iterations);
    return out;
}

double r_e(const Model& model, const Strategy& eta, double tol) {
    return spectral_radius(next_gen_matrix(model, eta), tol).rho;
}

double r0(const Model& model, double tol) {
    return r_e(model, Strategy::ones(model.size()), tol);
}

}  // namespace sis
