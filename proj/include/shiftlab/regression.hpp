#pragma once

// Solvers for the two-block regression family: the exact population
// solution of the d = 1 model, its small-(p, q) approximation, pooled
// multi-domain least squares (normal equations or full-batch Adam), and
// the L1(mu) hypothesis distance.

#include <cstdint>
#include <string>
#include <vector>

#include "shiftlab/common.hpp"
#include "shiftlab/linalg.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/sem_data.hpp"

namespace shiftlab {

// Regression weights over 2d features: first d causal, last d spurious.
struct Weights {
    Vector w;

    std::size_t dim() const { return w.size() / 2; }
    std::span<const double> causal_block() const { return {w.data(), dim()}; }
    std::span<const double> spurious_block() const { return {w.data() + dim(), dim()}; }

    void validate() const {
        require(w.size() % 2 == 0, "Weights: length must be even");
        require(all_finite(w), "Weights: non-finite entry");
    }
};

inline Weights weights_from_gamma(const GammaVector& gamma) {
    Weights out;
    out.w.assign(2 * gamma.dim(), 0.0);
    std::copy(gamma.values.begin(), gamma.values.end(), out.w.begin());
    return out;
}

// ---------------------------------------------------------------------------
// Population solutions of the d = 1 model
// ---------------------------------------------------------------------------

struct ClosedFormParams {
    double a = 1.0;      // Var(z1)
    double b = 1.0;      // Var(eps1)
    double c = 1.0;      // Var(eps2)
    double gamma = 1.0;  // causal coefficient
    double p = 0.0;      // Cov(z1, eps2)
    double q = 0.0;      // Cov(eps1, eps2)

    double kappa() const { return a * (b + c + 2.0 * q) - p * p; }
};

struct OmegaPair {
    double w1 = 0.0;  // weight on z1
    double w2 = 0.0;  // weight on z2
};

inline OmegaPair closed_form_omega(const ClosedFormParams& prm) {
    require(prm.a >= 0.0 && prm.b >= 0.0 && prm.c >= 0.0,
            "closed_form_omega: variances must be nonnegative");
    const double kappa = prm.kappa();
    if (kappa == 0.0) throw numeric_error("closed_form_omega: singular covariance (kappa = 0)");
    OmegaPair out;
    out.w1 = (prm.gamma * prm.a * (prm.c + prm.q) - prm.b * prm.p - prm.gamma * prm.p * prm.p -
              prm.q * prm.p) /
             kappa;
    out.w2 = prm.a * (prm.b + prm.q) / kappa;
    return out;
}

// The p, q -> 0 limit: (gamma * c / (b + c), b / (b + c)).
inline OmegaPair approx_omega(double b, double c, double gamma) {
    require(b >= 0.0 && c >= 0.0, "approx_omega: variances must be nonnegative");
    if (b + c == 0.0) throw numeric_error("approx_omega: b + c = 0");
    return {gamma * c / (b + c), b / (b + c)};
}

// Multi-domain average of the per-domain ratios.
inline OmegaPair approx_omega_multi(const std::vector<std::pair<double, double>>& envs,
                                    double gamma) {
    require(!envs.empty(), "approx_omega_multi: empty environment list");
    double causal = 0.0, spurious = 0.0;
    for (const auto& [b, c] : envs) {
        if (b + c <= 0.0) throw numeric_error("approx_omega_multi: b + c = 0 in some domain");
        causal += c / (b + c);
        spurious += b / (b + c);
    }
    const double inv = 1.0 / static_cast<double>(envs.size());
    return {gamma * causal * inv, spurious * inv};
}

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

struct OlsFit {
    Weights weights;
    double cond = 0.0;    // condition estimate of X^T X
    bool ridged = false;  // ill-conditioned system stabilized with a ridge
};

inline constexpr double kCondLimit = 1e12;
inline constexpr double kRidgeScale = 1e-10;

namespace detail {

inline OlsFit solve_normal_equations(Matrix gram, Vector rhs) {
    const std::size_t k = gram.rows();
    OlsFit fit;
    fit.cond = sym_condition(gram);
    if (!(fit.cond <= kCondLimit)) {
        double trace = 0.0;
        for (std::size_t j = 0; j < k; ++j) trace += gram(j, j);
        const double ridge = kRidgeScale * trace / static_cast<double>(k);
        for (std::size_t j = 0; j < k; ++j) gram(j, j) += ridge;
        fit.ridged = true;
    }
    Matrix chol = gram;
    if (!cholesky(chol))
        throw numeric_error("ols_fit: singular design, condition estimate " +
                            std::to_string(fit.cond));
    fit.weights.w = cholesky_solve(chol, std::move(rhs));
    if (!all_finite(fit.weights.w))
        throw numeric_error("ols_fit: non-finite solution, condition estimate " +
                            std::to_string(fit.cond));
    return fit;
}

}  // namespace detail

inline OlsFit ols_fit(const Matrix& x, const Vector& y) {
    require(x.rows() == y.size(), "ols_fit: row count mismatch");
    require(x.rows() >= x.cols(), "ols_fit: need at least as many rows as columns");
    const std::size_t k = x.cols();
    Matrix gram(k, k);
    Vector rhs(k, 0.0);
    accumulate_gram(x, gram, rhs, y);
    return detail::solve_normal_equations(std::move(gram), std::move(rhs));
}

enum class FitMethod { normal_eq, gd };

inline FitMethod parse_fit_method(const std::string& s) {
    if (s == "normal-eq") return FitMethod::normal_eq;
    if (s == "gd") return FitMethod::gd;
    throw validation_error("unknown fit method '" + s + "' (want normal-eq or gd)");
}

// Adam settings for the gd path: full batch, zero init, deterministic.
struct AdamSettings {
    double lr = 0.001;
    int epochs = 5000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

namespace detail {

struct PooledGram {
    Matrix gram;
    Vector rhs;
    double yy = 0.0;
    std::size_t rows = 0;
};

inline PooledGram pooled_gram(const MultiDomainDataset& ds) {
    require(!ds.domains.empty(), "pooled_fit: no domains");
    const std::size_t k = ds.domains.front().x.cols();
    PooledGram pg{Matrix(k, k), Vector(k, 0.0), 0.0, 0};
    for (const auto& dom : ds.domains) {
        require(dom.x.cols() == k, "pooled_fit: inconsistent feature dimension");
        accumulate_gram(dom.x, pg.gram, pg.rhs, dom.y);
        for (double v : dom.y) pg.yy += v * v;
        pg.rows += dom.n();
    }
    require(pg.rows >= k, "pooled_fit: fewer pooled rows than columns");
    return pg;
}

// Full-batch Adam on the pooled mean squared error. The gradient comes
// from the precomputed Gram matrices, so each epoch is O(k^2).
inline OlsFit adam_fit(const PooledGram& pg, const AdamSettings& cfg) {
    const std::size_t k = pg.gram.rows();
    const double inv_n = 1.0 / static_cast<double>(pg.rows);
    OlsFit fit;
    fit.cond = sym_condition(pg.gram);
    Vector w(k, 0.0), m(k, 0.0), v(k, 0.0);
    double b1t = 1.0, b2t = 1.0;
    for (int t = 1; t <= cfg.epochs; ++t) {
        Vector gw = matvec(pg.gram, w);
        double loss = pg.yy;
        for (std::size_t j = 0; j < k; ++j) loss += w[j] * (gw[j] - 2.0 * pg.rhs[j]);
        loss *= inv_n;
        if (!std::isfinite(loss)) throw numeric_error("pooled_fit: gd diverged");
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        for (std::size_t j = 0; j < k; ++j) {
            const double g = 2.0 * inv_n * (gw[j] - pg.rhs[j]);
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m[j] / (1.0 - b1t);
            const double vhat = v[j] / (1.0 - b2t);
            w[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
    if (!all_finite(w)) throw numeric_error("pooled_fit: gd diverged");
    fit.weights.w = std::move(w);
    return fit;
}

}  // namespace detail

inline OlsFit pooled_fit(const MultiDomainDataset& ds, FitMethod method,
                         const AdamSettings& adam = {}) {
    detail::PooledGram pg = detail::pooled_gram(ds);
    if (method == FitMethod::normal_eq)
        return detail::solve_normal_equations(std::move(pg.gram), std::move(pg.rhs));
    return detail::adam_fit(pg, adam);
}

// Max-abs residual of Y - X w over one domain.
inline double max_abs_residual(const DomainDataset& dom, const Weights& w) {
    require(dom.x.cols() == w.w.size(), "max_abs_residual: dimension mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < dom.n(); ++i) {
        auto xi = dom.x.row(i);
        double pred = 0.0;
        for (std::size_t j = 0; j < xi.size(); ++j) pred += xi[j] * w.w[j];
        worst = std::max(worst, std::abs(dom.y[i] - pred));
    }
    return worst;
}

inline double mean_abs(std::span<const double> xs) {
    double s = 0.0;
    for (double v : xs) s += std::abs(v);
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// ---------------------------------------------------------------------------
// L1(mu) hypothesis distance
// ---------------------------------------------------------------------------

// Empirical mean of |h^T x - h'^T x| over the rows of mu_samples.
inline double l1_distance(const Weights& h, const Weights& hp, const Matrix& mu_samples) {
    require(h.w.size() == hp.w.size(), "l1_distance: weight length mismatch");
    require(mu_samples.cols() == h.w.size(), "l1_distance: sample dimension mismatch");
    require(mu_samples.rows() > 0, "l1_distance: empty mu sample");
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_samples.rows(); ++i) {
        auto xi = mu_samples.row(i);
        double diff = 0.0;
        for (std::size_t j = 0; j < xi.size(); ++j) diff += (h.w[j] - hp.w[j]) * xi[j];
        acc += std::abs(diff);
    }
    return acc / static_cast<double>(mu_samples.rows());
}

// Exact variant for finite hypotheses: sum_k mu_k |h(x_k) - h'(x_k)|.
inline double l1_distance_exact(std::span<const double> h_vals, std::span<const double> hp_vals,
                                std::span<const double> mu) {
    require(h_vals.size() == hp_vals.size() && h_vals.size() == mu.size(),
            "l1_distance_exact: length mismatch");
    require(!mu.empty(), "l1_distance_exact: empty support");
    double acc = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) acc += mu[k] * std::abs(h_vals[k] - hp_vals[k]);
    return acc;
}

// Declared artifact parameter: the default mu sample is 10^5 standard
// normal draws from this fixed seed.
inline constexpr std::size_t kMuSampleSize = 100000;
inline constexpr std::uint64_t kMuSampleSeed = 0x11d5ee0fULL;

inline Matrix standard_mu_sample(std::size_t dim, std::size_t n = kMuSampleSize,
                                 std::uint64_t seed = kMuSampleSeed) {
    Rng rng(derive_seed(seed, 0x6d75ULL, dim));
    Matrix m(n, dim);
    for (double& v : m.flat()) v = rng.next_normal();
    return m;
}

}  // namespace shiftlab
