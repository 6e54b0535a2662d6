#pragma once

// Test-only oracles, independent of the library's computation paths:
// adaptive Simpson quadrature, reference densities, Bernoulli KL, and a
// direct 2x2 least-squares solver for Monte-Carlo cross-checks.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double integrate_rec(const std::function<double(double)>& f, double a, double b,
                            double whole, double tol, int depth) {
    const double c = 0.5 * (a + b);
    const double left = simpson(f, a, c);
    const double right = simpson(f, c, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return integrate_rec(f, a, c, left, 0.5 * tol, depth - 1) +
           integrate_rec(f, c, b, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
    return integrate_rec(f, a, b, simpson(f, a, b), tol, 48);
}

inline double normal_pdf(double x, double mu, double var) {
    const double d = x - mu;
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * 3.14159265358979323846 * var);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Student-t density with dof nu.
inline double t_pdf(double x, double nu) {
    const double c =
        std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
        std::sqrt(nu * 3.14159265358979323846);
    return c * std::pow(1.0 + x * x / nu, -0.5 * (nu + 1.0));
}

// CDF of Student-t by quadrature from 0 (where CDF = 1/2).
inline double t_cdf_quadrature(double x, double nu) {
    if (x == 0.0) return 0.5;
    const double mass = integrate([nu](double u) { return t_pdf(u, nu); }, 0.0,
                                  std::abs(x), 1e-10);
    return x > 0.0 ? 0.5 + mass : 0.5 - mass;
}

// KL between two Gaussians by direct quadrature of log(p/q) p.
inline double kl_gaussian_quadrature(double mu1, double var1, double mu2, double var2) {
    auto f = [=](double x) {
        const double p = normal_pdf(x, mu1, var1);
        if (p <= 0.0) return 0.0;
        return p * std::log(p / normal_pdf(x, mu2, var2));
    };
    const double sd = std::sqrt(var1);
    return integrate(f, mu1 - 14.0 * sd, mu1 + 14.0 * sd, 1e-11);
}

inline double bernoulli_kl(double p, double q) {
    double acc = 0.0;
    if (p > 0.0) acc += p * std::log(p / q);
    if (p < 1.0) acc += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return acc;
}

// Direct 2-feature least-squares, solved with Cramer's rule.
struct Ols2 {
    double w1 = 0.0;
    double w2 = 0.0;
};

inline Ols2 ols2(const std::vector<double>& x1, const std::vector<double>& x2,
                 const std::vector<double>& y) {
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s11 += x1[i] * x1[i];
        s12 += x1[i] * x2[i];
        s22 += x2[i] * x2[i];
        b1 += x1[i] * y[i];
        b2 += x2[i] * y[i];
    }
    const double det = s11 * s22 - s12 * s12;
    return {(b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det};
}

inline double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double v : xs) s += v;
    return s / static_cast<double>(xs.size());
}

inline double variance(const std::vector<double>& xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double v : xs) s += (v - m) * (v - m);
    return s / static_cast<double>(xs.size() - 1);
}

}  // namespace oracle
