#pragma once

// OLS inference: coefficient t-statistics, two-sided p-values and 95%
// confidence intervals. The Student-t CDF is computed through the
// regularized incomplete beta function (Lentz continued fraction); the
// quantile inverts it by bisection.

#include <cmath>
#include <string>
#include <vector>

#include "shiftlab/common.hpp"
#include "shiftlab/linalg.hpp"

namespace shiftlab {

namespace detail {

// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
inline double beta_inc(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    const bool flip = x > (a + 1.0) / (a + b + 2.0);
    if (flip) {
        std::swap(a, b);
        x = 1.0 - x;
    }

    constexpr double tiny = 1e-30;
    constexpr double eps = 1e-14;
    constexpr int max_iter = 300;

    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int mm = 1; mm <= max_iter; ++mm) {
        const int m2 = 2 * mm;
        double aa = mm * (b - mm) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + mm) * (qab + mm) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log(1.0 - x));
    const double result = bt * h / a;
    return flip ? 1.0 - result : result;
}

}  // namespace detail

inline double t_cdf(double x, double dof) {
    require(dof >= 1.0, "t_cdf: dof must be >= 1");
    if (x == 0.0) return 0.5;
    // x^2/(dof + x^2) stays accurate for tiny |x|, where dof/(dof + x^2)
    // would round to 1 and flatten the CDF around the median
    const double y = x * x / (dof + x * x);
    const double half = 0.5 * detail::beta_inc(0.5, 0.5 * dof, y);
    return x > 0.0 ? 0.5 + half : 0.5 - half;
}

// Inverse CDF by bisection; monotonicity of t_cdf makes this exact to tol.
inline double t_quantile(double p, double dof) {
    require(p > 0.0 && p < 1.0, "t_quantile: p must be in (0, 1)");
    require(dof >= 1.0, "t_quantile: dof must be >= 1");
    double hi = 1.0;
    while (t_cdf(hi, dof) < p && hi < 1e12) hi *= 2.0;
    double lo = -1.0;
    while (t_cdf(lo, dof) > p && lo > -1e12) lo *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (t_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

struct CoefStat {
    std::string name;
    double coef = 0.0;
    double std_err = 0.0;
    double t = 0.0;
    double p = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct TTestReport {
    std::vector<CoefStat> coefs;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t dof = 0;
    double residual_variance = 0.0;
    bool degenerate = false;  // zero residual variance: p reported as 0
};

// Classical OLS t-test table. With intercept = true a leading constant
// column is prepended. Near-singular designs are rejected (no ridge here:
// standard errors would be meaningless).
inline TTestReport ols_ttest(const Matrix& x, const Vector& y, bool intercept,
                             std::vector<std::string> names = {}) {
    require(x.rows() == y.size(), "ols_ttest: row count mismatch");
    const std::size_t n = x.rows();
    const std::size_t k = x.cols() + (intercept ? 1 : 0);
    require(n > k, "ols_ttest: need n > k");

    Matrix design(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j0 = 0;
        if (intercept) design(i, j0++) = 1.0;
        for (std::size_t j = 0; j < x.cols(); ++j) design(i, j0 + j) = x(i, j);
    }
    if (names.empty()) {
        if (intercept) names.push_back("const");
        for (std::size_t j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    } else if (intercept) {
        names.insert(names.begin(), "const");
    }
    require(names.size() == k, "ols_ttest: name count mismatch");

    Matrix gram(k, k);
    Vector rhs(k, 0.0);
    accumulate_gram(design, gram, rhs, y);
    const double cond = sym_condition(gram);
    if (!(cond < 1e12))
        throw numeric_error("ols_ttest: design is rank deficient or collinear (cond ~ " +
                            std::to_string(cond) + ")");
    const Matrix inv = spd_inverse(gram);
    Vector beta = matvec(inv, rhs);

    double rss = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        for (std::size_t j = 0; j < k; ++j) pred += design(i, j) * beta[j];
        const double r = y[i] - pred;
        rss += r * r;
        yy += y[i] * y[i];
    }

    TTestReport rep;
    rep.n = n;
    rep.k = k;
    rep.dof = n - k;
    rep.residual_variance = rss / static_cast<double>(rep.dof);
    rep.degenerate = rss <= 1e-20 * std::max(yy, 1.0);

    const double tq =
        rep.degenerate ? 0.0 : t_quantile(0.975, static_cast<double>(rep.dof));
    for (std::size_t j = 0; j < k; ++j) {
        CoefStat cs;
        cs.name = names[j];
        cs.coef = beta[j];
        if (rep.degenerate) {
            cs.std_err = 0.0;
            cs.t = std::numeric_limits<double>::infinity();
            cs.p = 0.0;
            cs.ci_low = cs.ci_high = beta[j];
        } else {
            cs.std_err = std::sqrt(rep.residual_variance * inv(j, j));
            cs.t = cs.coef / cs.std_err;
            cs.p = 2.0 * (1.0 - t_cdf(std::abs(cs.t), static_cast<double>(rep.dof)));
            cs.ci_low = cs.coef - tq * cs.std_err;
            cs.ci_high = cs.coef + tq * cs.std_err;
        }
        rep.coefs.push_back(std::move(cs));
    }
    return rep;
}

}  // namespace shiftlab
