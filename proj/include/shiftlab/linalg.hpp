#pragma once

// Dense row-major matrices and the symmetric solvers used by the
// regression and inference modules. Systems here are small (k = 2d,
// d <= a few dozen), so cyclic Jacobi gives exact-enough eigenvalues
// for conditioning and Cholesky handles the solves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "shiftlab/common.hpp"

namespace shiftlab {

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> flat() const { return data_; }
    std::span<double> flat() { return data_; }

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Vector = std::vector<double>;

// A = X^T X (symmetric k x k) accumulated in place; pass a zeroed A to start.
inline void accumulate_gram(const Matrix& x, Matrix& a, Vector& rhs, const Vector& y) {
    const std::size_t n = x.rows(), k = x.cols();
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double v = xi[p];
            if (v == 0.0) continue;
            double* arow = &a(p, 0);
            for (std::size_t q = p; q < k; ++q) arow[q] += v * xi[q];
            rhs[p] += v * y[i];
        }
    }
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t q = 0; q < p; ++q) a(p, q) = a(q, p);
}

inline Vector matvec(const Matrix& a, const Vector& v) {
    Vector out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        auto ri = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) s += ri[j] * v[j];
        out[i] = s;
    }
    return out;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline Vector sym_eigenvalues(Matrix a) {
    const std::size_t k = a.rows();
    require(k == a.cols(), "sym_eigenvalues: matrix must be square");
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < k; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    Vector eig(k);
    for (std::size_t i = 0; i < k; ++i) eig[i] = a(i, i);
    return eig;
}

// lambda_max / lambda_min over absolute eigenvalues; infinity when singular.
inline double sym_condition(const Matrix& a) {
    Vector eig = sym_eigenvalues(a);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double e : eig) {
        const double v = std::abs(e);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

// In-place Cholesky A = L L^T; returns false when A is not positive definite.
inline bool cholesky(Matrix& a) {
    const std::size_t k = a.rows();
    for (std::size_t j = 0; j < k; ++j) {
        double d = a(j, j);
        for (std::size_t p = 0; p < j; ++p) d -= a(j, p) * a(j, p);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < k; ++i) {
            double s = a(i, j);
            for (std::size_t p = 0; p < j; ++p) s -= a(i, p) * a(j, p);
            a(i, j) = s / ljj;
        }
    }
    return true;
}

inline Vector cholesky_solve(const Matrix& l, Vector b) {
    const std::size_t k = l.rows();
    for (std::size_t i = 0; i < k; ++i) {  // forward: L z = b
        double s = b[i];
        for (std::size_t p = 0; p < i; ++p) s -= l(i, p) * b[p];
        b[i] = s / l(i, i);
    }
    for (std::size_t ii = k; ii-- > 0;) {  // backward: L^T x = z
        double s = b[ii];
        for (std::size_t p = ii + 1; p < k; ++p) s -= l(p, ii) * b[p];
        b[ii] = s / l(ii, ii);
    }
    return b;
}

// Solve A x = b for symmetric positive definite A.
inline Vector solve_spd(Matrix a, const Vector& b) {
    if (!cholesky(a)) throw numeric_error("solve_spd: matrix not positive definite");
    return cholesky_solve(a, b);
}

// Full inverse of a symmetric positive definite matrix.
inline Matrix spd_inverse(Matrix a) {
    const std::size_t k = a.rows();
    if (!cholesky(a)) throw numeric_error("spd_inverse: matrix not positive definite");
    Matrix inv(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        Vector e(k, 0.0);
        e[j] = 1.0;
        Vector col = cholesky_solve(a, std::move(e));
        for (std::size_t i = 0; i < k; ++i) inv(i, j) = col[i];
    }
    return inv;
}

}  // namespace shiftlab
