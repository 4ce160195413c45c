#ifndef SIS_TYPES_HPP
#define SIS_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sis {

using Vec = std::vector<double>;

/// Dense row-major matrix. Feature spaces are desk-scale, so no sparsity.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<Vec>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;

    /// y = M x
    Vec apply(const Vec& x) const;

    double max_row_sum() const;
    bool all_zero() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input (files, dimensions, invariant violations).
struct InputError : Error {
    using Error::Error;
};

/// An iterative solver failed to meet its tolerance within its cap.
struct SolverError : Error {
    using Error::Error;
};

/// A requested computation exceeds the configured work budget.
struct BudgetError : Error {
    using Error::Error;
};

inline double linf_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double linf_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double sum(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

inline double max_element(const Vec& v) {
    double m = v.empty() ? 0.0 : v[0];
    for (double x : v) m = std::max(m, x);
    return m;
}

inline void check_dimension(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw InputError(std::string(what) + ": dimension " + std::to_string(got) +
                         " does not match model size " + std::to_string(want));
}

}  // namespace sis

#endif
