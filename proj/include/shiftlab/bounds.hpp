#pragma once

// The Fano-derived sigma constants and high-probability bound right-hand
// sides for the clean (alpha) and Massart (beta, m) domain families, plus
// the minimum-domain-count requirement and the Fano precondition itself.
// Everything is in nats.

#include <cmath>
#include <optional>

#include "shiftlab/common.hpp"

namespace shiftlab {

struct BoundReport {
    double sigma = 0.0;
    double rhs = 0.0;            // (1 - sigma) + sqrt(ln(1/delta) / (2E))
    bool feasible = false;       // alpha (or beta) within the admissible region
    double condition_slack = 0.0;  // admissible limit minus the supplied shift
    int min_E = 0;               // smallest domain count admitting this shift
};

// Exactly one of alpha / (beta, m) must be supplied.
struct BoundInputs {
    int E = 0;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> m;
    double delta = 0.05;
    double eps = 0.0;  // indicator tolerance; forwarded to simulators only

    void validate() const {
        require(E >= 3, "BoundInputs: E must be >= 3");
        require(delta > 0.0 && delta < 1.0, "BoundInputs: delta must be in (0, 1)");
        require(eps >= 0.0, "BoundInputs: eps must be nonnegative");
        const bool clean = alpha.has_value();
        const bool massart = beta.has_value() && m.has_value();
        require(clean != massart, "BoundInputs: supply alpha or (beta, m), not both");
        if (clean) {
            require(std::isfinite(*alpha) && *alpha >= 0.0,
                    "BoundInputs: alpha must be finite and nonnegative");
        } else {
            require(std::isfinite(*beta) && *beta >= 0.0,
                    "BoundInputs: beta must be finite and nonnegative");
            require(*m > 0.0 && *m < 1.0, "BoundInputs: m must be in (0, 1)");
        }
    }
};

namespace detail {

inline void check_common(int e, double delta) {
    require(e >= 3, "bounds: E must be >= 3");
    require(delta > 0.0 && delta < 1.0, "bounds: delta must be in (0, 1)");
}

inline double hoeffding_term(int e, double delta) {
    return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(e)));
}

}  // namespace detail

// Smallest integer E with alpha <= ln((E - 1) / 2), i.e. E >= 2 e^alpha + 1.
inline int min_domains(double alpha) {
    require(std::isfinite(alpha) && alpha >= 0.0, "min_domains: alpha must be finite and >= 0");
    int e = static_cast<int>(std::ceil(2.0 * std::exp(alpha))) + 1;
    e = std::max(e, 3);
    while (e > 3 && std::log((static_cast<double>(e) - 2.0) / 2.0) >= alpha) --e;
    while (std::log((static_cast<double>(e) - 1.0) / 2.0) < alpha) ++e;
    return e;
}

inline double sigma_t1(double alpha, int e) {
    require(e >= 3, "sigma_t1: E must be >= 3");
    require(std::isfinite(alpha) && alpha >= 0.0, "sigma_t1: alpha must be finite and >= 0");
    return (alpha + std::log(2.0)) / std::log(static_cast<double>(e) - 1.0);
}

inline BoundReport rhs_t1(double alpha, int e, double delta) {
    detail::check_common(e, delta);
    require(std::isfinite(alpha) && alpha >= 0.0, "rhs_t1: alpha must be finite and >= 0");
    BoundReport rep;
    rep.sigma = sigma_t1(alpha, e);
    rep.rhs = (1.0 - rep.sigma) + detail::hoeffding_term(e, delta);
    const double limit = std::log((static_cast<double>(e) - 1.0) / 2.0);
    rep.condition_slack = limit - alpha;
    rep.feasible = alpha <= limit;
    rep.min_E = min_domains(alpha);
    return rep;
}

inline double sigma_t2(double beta, double m, int e) {
    require(e >= 3, "sigma_t2: E must be >= 3");
    require(std::isfinite(beta) && beta >= 0.0, "sigma_t2: beta must be finite and >= 0");
    require(m > 0.0 && m < 1.0, "sigma_t2: m must be in (0, 1)");
    const double m2 = m * m;
    return (2.0 * beta * m2 + (1.0 - m2) * std::log(2.0)) /
           ((1.0 - m2) * std::log(static_cast<double>(e) - 1.0));
}

inline BoundReport rhs_t2(double beta, double m, int e, double delta) {
    detail::check_common(e, delta);
    require(std::isfinite(beta) && beta >= 0.0, "rhs_t2: beta must be finite and >= 0");
    require(m > 0.0 && m < 1.0, "rhs_t2: m must be in (0, 1)");
    BoundReport rep;
    rep.sigma = sigma_t2(beta, m, e);
    rep.rhs = (1.0 - rep.sigma) + detail::hoeffding_term(e, delta);
    const double m2 = m * m;
    const double limit =
        (1.0 - m2) / (2.0 * m2) * std::log((static_cast<double>(e) - 1.0) / 2.0);
    rep.condition_slack = limit - beta;
    rep.feasible = beta <= limit;
    rep.min_E = min_domains(2.0 * beta * m2 / (1.0 - m2));
    return rep;
}

inline BoundReport bound_report(const BoundInputs& in) {
    in.validate();
    if (in.alpha) return rhs_t1(*in.alpha, in.E, in.delta);
    return rhs_t2(*in.beta, *in.m, in.E, in.delta);
}

// K = kl / (m * ln((1+m)/(1-m))), the L1 gap recovered from a Massart KL.
inline double corollary_K(double m, double kl) {
    require(m > 0.0 && m < 1.0, "corollary_K: m must be in (0, 1)");
    require(std::isfinite(kl) && kl >= 0.0, "corollary_K: kl must be finite and >= 0");
    return kl / (m * std::log((1.0 + m) / (1.0 - m)));
}

// Fano precondition: K + ln 2 <= (1 - gamma) * ln(r - 1).
inline bool fano_check(double k, int r, double gamma) {
    require(r >= 3, "fano_check: r must be >= 3");
    require(gamma >= 0.0 && gamma <= 1.0, "fano_check: gamma must be in [0, 1]");
    require(std::isfinite(k) && k >= 0.0, "fano_check: K must be finite and >= 0");
    return k + std::log(2.0) <= (1.0 - gamma) * std::log(static_cast<double>(r) - 1.0);
}

}  // namespace shiftlab
