#pragma once

// Exact KL divergences (natural log throughout) and the pairwise shift
// matrix whose supremum instantiates the alpha / beta constants of the
// domain bounds. KL is asymmetric, so the sup runs over ordered pairs.

#include <cmath>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "shiftlab/common.hpp"
#include "shiftlab/linalg.hpp"

namespace shiftlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// KL(N(mu1, var1); N(mu2, var2)) in nats.
inline double kl_gaussian(double mu1, double var1, double mu2, double var2) {
    if (!(var1 > 0.0) || !(var2 > 0.0))
        throw validation_error("kl_gaussian: variances must be positive");
    return std::log(std::sqrt(var2 / var1)) +
           (var1 + (mu1 - mu2) * (mu1 - mu2)) / (2.0 * var2) - 0.5;
}

// Product of independent coordinates: KL adds up.
inline double kl_gaussian_diag(std::span<const double> mu1, std::span<const double> var1,
                               std::span<const double> mu2, std::span<const double> var2) {
    require(mu1.size() == var1.size() && mu1.size() == mu2.size() && mu1.size() == var2.size(),
            "kl_gaussian_diag: length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < mu1.size(); ++j)
        acc += kl_gaussian(mu1[j], var1[j], mu2[j], var2[j]);
    return acc;
}

// KL(p; q) for probability vectors; infinity when p is not absolutely
// continuous w.r.t. q.
inline double kl_discrete(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), "kl_discrete: length mismatch");
    require(!p.empty(), "kl_discrete: empty support");
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        require(p[i] >= 0.0 && q[i] >= 0.0, "kl_discrete: negative mass");
        sp += p[i];
        sq += q[i];
    }
    require(std::abs(sp - 1.0) <= 1e-9 && std::abs(sq - 1.0) <= 1e-9,
            "kl_discrete: inputs must sum to 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;  // 0 * log(0/q) = 0
        if (q[i] == 0.0) return kInf;
        acc += p[i] * std::log(p[i] / q[i]);
    }
    return acc;
}

// Massart-family KL: m * ln((1+m)/(1-m)) * ||t - s||_1.
inline double kl_massart(double m, double l1) {
    require(m >= 0.0 && m < 1.0, "kl_massart: margin must be in [0, 1)");
    require(l1 >= 0.0, "kl_massart: L1 distance must be nonnegative");
    if (m == 0.0) return 0.0;
    return m * std::log((1.0 + m) / (1.0 - m)) * l1;
}

// ---------------------------------------------------------------------------
// Shift matrices
// ---------------------------------------------------------------------------

struct GaussianDiagDescriptor {
    Vector mean;
    Vector var;
};

struct DiscreteDescriptor {
    Vector p;
};

struct MassartDescriptor {
    double m = 0.0;
    std::vector<std::uint8_t> labels;  // Bayes labeling over the atoms
    Vector mu;                         // shared probability measure
};

using ShiftDescriptor = std::variant<GaussianDiagDescriptor, DiscreteDescriptor, MassartDescriptor>;

struct ShiftReport {
    std::vector<int> env_ids;
    Matrix kl;                  // E x E, nats, zero diagonal
    double alpha = 0.0;         // sup over ordered off-diagonal pairs
    std::optional<double> beta; // massart kind only: sup pairwise ||t - s||_1
};

namespace detail {

inline double massart_l1(const MassartDescriptor& a, const MassartDescriptor& b) {
    require(a.labels.size() == b.labels.size() && a.mu.size() == a.labels.size(),
            "shift_matrix: massart descriptors must share the atom set");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.labels.size(); ++k)
        if (a.labels[k] != b.labels[k]) acc += a.mu[k];
    return acc;
}

inline double descriptor_kl(const ShiftDescriptor& a, const ShiftDescriptor& b) {
    if (const auto* ga = std::get_if<GaussianDiagDescriptor>(&a)) {
        const auto& gb = std::get<GaussianDiagDescriptor>(b);
        return kl_gaussian_diag(ga->mean, ga->var, gb.mean, gb.var);
    }
    if (const auto* da = std::get_if<DiscreteDescriptor>(&a)) {
        const auto& db = std::get<DiscreteDescriptor>(b);
        return kl_discrete(da->p, db.p);
    }
    const auto& ma = std::get<MassartDescriptor>(a);
    const auto& mb = std::get<MassartDescriptor>(b);
    require(ma.m == mb.m, "shift_matrix: massart domains must share the margin m");
    return kl_massart(ma.m, massart_l1(ma, mb));
}

}  // namespace detail

inline ShiftReport shift_matrix(const std::vector<ShiftDescriptor>& domains,
                                std::vector<int> env_ids = {}) {
    require(domains.size() >= 2, "shift_matrix: need at least two domains");
    const std::size_t kind = domains.front().index();
    for (const auto& d : domains)
        require(d.index() == kind, "shift_matrix: mixed descriptor kinds");

    ShiftReport rep;
    const std::size_t e = domains.size();
    if (env_ids.empty()) {
        for (std::size_t i = 0; i < e; ++i) rep.env_ids.push_back(static_cast<int>(i + 1));
    } else {
        require(env_ids.size() == e, "shift_matrix: env_ids length mismatch");
        rep.env_ids = std::move(env_ids);
    }
    rep.kl = Matrix(e, e);
    rep.alpha = 0.0;
    double beta = 0.0;
    for (std::size_t i = 0; i < e; ++i) {
        for (std::size_t j = 0; j < e; ++j) {
            if (i == j) continue;
            const double v = detail::descriptor_kl(domains[i], domains[j]);
            rep.kl(i, j) = v;
            rep.alpha = std::max(rep.alpha, v);
            if (kind == 2 && j > i) {
                beta = std::max(beta, detail::massart_l1(std::get<MassartDescriptor>(domains[i]),
                                                         std::get<MassartDescriptor>(domains[j])));
            }
        }
    }
    if (kind == 2) rep.beta = beta;
    return rep;
}

}  // namespace shiftlab
