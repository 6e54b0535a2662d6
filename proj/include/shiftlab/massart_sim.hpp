#pragma once

// Monte-Carlo verification of the domain-count bounds on a finite atom
// set. A family of Bayes classifiers is built with a prescribed maximum
// pairwise L1 spread (beta), labels are drawn under Massart noise with
// margin m (eta = (1 +/- m)/2 on the noisy region), a pooled 0-1-loss ERM
// estimate is trained, and the indicator average
//     LHS = (1/E) sum_i 1{ d(hat, bayes_i) >= eps }
// is compared against the theorem right-hand side across independent
// trials.
//
// Distances, KLs and the ERM are all exact on the finite support, so a
// bound violation can only come from the bound itself, not estimation.
//
// Two modes:
//   massart: shared uniform mu, classifiers spread to max pairwise L1
//            beta; alpha = kl_massart(m, beta).
//   clean:   m = 1 (noise-free). Distinct deterministic labels on shared
//            support would force infinite KL, so shift is realized purely
//            through tilted per-domain sampling measures over a shared
//            labeling; alpha = sup pairwise KL of the (x, y) joints.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shiftlab/bounds.hpp"
#include "shiftlab/common.hpp"
#include "shiftlab/divergence.hpp"
#include "shiftlab/regression.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

struct DiscreteClassifier {
    std::vector<std::uint8_t> labels;  // 0/1 per atom
    Vector mu;                         // distance reference measure over atoms

    std::size_t atoms() const { return labels.size(); }
};

// Exact L1(mu) distance between two classifiers on the shared atom set.
inline double classifier_distance(const DiscreteClassifier& a, const DiscreteClassifier& b) {
    require(a.labels.size() == b.labels.size(), "classifier_distance: atom count mismatch");
    require(a.mu == b.mu, "classifier_distance: distance measures differ");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.labels.size(); ++k)
        if (a.labels[k] != b.labels[k]) acc += a.mu[k];
    return acc;
}

struct MassartDomain {
    DiscreteClassifier bayes;
    double m = 0.0;      // Massart margin; m = 1 means noise-free labels
    Vector eta;          // P(Y = 1 | X = atom)
    Vector sampling_mu;  // atom draw distribution (equals bayes.mu unless tilted)
    std::vector<std::pair<int, std::uint8_t>> samples;
};

struct MassartFamily {
    std::vector<MassartDomain> domains;
    double m = 0.0;
    double realized_beta = 0.0;  // max pairwise L1 between Bayes classifiers
    double alpha = 0.0;          // sup pairwise KL between domain joints
};

namespace detail {

inline Vector uniform_mu(std::size_t k) {
    return Vector(k, 1.0 / static_cast<double>(k));
}

inline Vector eta_from_labels(const std::vector<std::uint8_t>& labels, double m,
                              std::size_t x2_atoms) {
    Vector eta(labels.size());
    const std::size_t x1_end = labels.size() - x2_atoms;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (k >= x1_end) {
            eta[k] = 0.0;  // X2 region: eta = t = 0
        } else if (m >= 1.0) {
            eta[k] = static_cast<double>(labels[k]);
        } else {
            eta[k] = (1.0 + (2.0 * static_cast<double>(labels[k]) - 1.0) * m) / 2.0;
        }
    }
    return eta;
}

// Joint (x, y) distribution of a noise-free domain as a 2K-atom vector.
inline Vector clean_joint(const MassartDomain& dom) {
    Vector joint(2 * dom.bayes.atoms(), 0.0);
    for (std::size_t k = 0; k < dom.bayes.atoms(); ++k)
        joint[2 * k + dom.bayes.labels[k]] = dom.sampling_mu[k];
    return joint;
}

}  // namespace detail

// Builds E Bayes classifiers over uniform mu on K atoms whose maximum
// pairwise L1 distance realizes target_beta within 1/K: E - 1 domains
// share a base labeling and one designated domain flips
// max(1, round(target_beta * K)) atoms (a positive requested shift always
// yields a family that actually shifts). Atoms in the optional X2 region
// carry label 0 with eta = 0 in every domain and are excluded from flips.
inline MassartFamily make_domains(std::size_t k, std::size_t e, double m, double target_beta,
                                  std::uint64_t seed, double x2_fraction = 0.0) {
    require(k >= 2, "make_domains: need at least two atoms");
    require(e >= 3, "make_domains: need at least three domains");
    require(m > 0.0 && m < 1.0, "make_domains: margin must be in (0, 1)");
    require(target_beta >= 0.0, "make_domains: target_beta must be nonnegative");
    require(x2_fraction >= 0.0 && x2_fraction < 1.0, "make_domains: x2_fraction in [0, 1)");

    const auto x2_atoms = static_cast<std::size_t>(x2_fraction * static_cast<double>(k));
    const std::size_t pool = k - x2_atoms;  // flippable X1 atoms
    auto flips = static_cast<std::size_t>(std::llround(target_beta * static_cast<double>(k)));
    if (target_beta > 0.0 && flips == 0) flips = 1;
    if (flips > pool)
        throw validation_error("make_domains: target_beta " + std::to_string(target_beta) +
                               " unachievable with " + std::to_string(pool) + " flippable atoms");

    Rng rng(derive_seed(seed, 0x6261736531ULL, k));
    std::vector<std::uint8_t> base(k, 0);
    for (std::size_t i = 0; i < pool; ++i) base[i] = rng.next_u64() & 1u;

    MassartFamily fam;
    fam.m = m;
    const Vector mu = detail::uniform_mu(k);
    for (std::size_t i = 0; i < e; ++i) {
        MassartDomain dom;
        dom.bayes.labels = base;
        dom.bayes.mu = mu;
        dom.m = m;
        if (i + 1 == e) {
            for (std::size_t j = 0; j < flips; ++j) dom.bayes.labels[j] ^= 1u;
        }
        dom.eta = detail::eta_from_labels(dom.bayes.labels, m, x2_atoms);
        dom.sampling_mu = mu;
        fam.domains.push_back(std::move(dom));
    }
    fam.realized_beta = static_cast<double>(flips) / static_cast<double>(k);
    fam.alpha = kl_massart(m, fam.realized_beta);
    return fam;
}

// Noise-free family for the clean bound: one shared random labeling, with
// per-domain sampling measures mu_e(x) proportional to exp(tilt_e * u(x)),
// tilt_e spread linearly over [0, tilt]. Distances still use uniform mu.
inline MassartFamily make_clean_domains(std::size_t k, std::size_t e, double tilt,
                                        std::uint64_t seed) {
    require(k >= 2, "make_clean_domains: need at least two atoms");
    require(e >= 3, "make_clean_domains: need at least three domains");
    require(tilt >= 0.0, "make_clean_domains: tilt must be nonnegative");

    Rng rng(derive_seed(seed, 0x636c65616eULL, k));
    std::vector<std::uint8_t> labels(k, 0);
    for (auto& bit : labels) bit = rng.next_u64() & 1u;

    MassartFamily fam;
    fam.m = 1.0;
    fam.realized_beta = 0.0;
    const Vector mu = detail::uniform_mu(k);
    for (std::size_t i = 0; i < e; ++i) {
        MassartDomain dom;
        dom.bayes.labels = labels;
        dom.bayes.mu = mu;
        dom.m = 1.0;
        dom.eta = detail::eta_from_labels(labels, 1.0, 0);
        const double tilt_e =
            e == 1 ? 0.0 : tilt * static_cast<double>(i) / static_cast<double>(e - 1);
        Vector w(k);
        double total = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            const double u = static_cast<double>(a) / static_cast<double>(k - 1) - 0.5;
            w[a] = std::exp(tilt_e * u);
            total += w[a];
        }
        for (double& v : w) v /= total;
        dom.sampling_mu = std::move(w);
        fam.domains.push_back(std::move(dom));
    }

    double alpha = 0.0;
    for (std::size_t i = 0; i < e; ++i) {
        const Vector pi = detail::clean_joint(fam.domains[i]);
        for (std::size_t j = 0; j < e; ++j) {
            if (i == j) continue;
            alpha = std::max(alpha, kl_discrete(pi, detail::clean_joint(fam.domains[j])));
        }
    }
    fam.alpha = alpha;
    return fam;
}

// Draws n atoms from the domain's sampling measure and labels them
// Bernoulli(eta(x)). Deterministic per seed.
inline MassartDomain sample_labels(const MassartDomain& descriptor, std::size_t n,
                                   std::uint64_t seed) {
    require(n >= 1, "sample_labels: n must be >= 1");
    MassartDomain dom = descriptor;
    dom.samples.clear();
    dom.samples.reserve(n);
    Rng rng(seed);
    const std::size_t k = dom.bayes.atoms();
    Vector cdf(k);
    double acc = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        acc += dom.sampling_mu[a];
        cdf[a] = acc;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.next_unit() * acc;
        std::size_t atom = 0;
        while (atom + 1 < k && cdf[atom] <= u) ++atom;
        const auto label = static_cast<std::uint8_t>(rng.next_bernoulli(dom.eta[atom]) ? 1 : 0);
        dom.samples.emplace_back(static_cast<int>(atom), label);
    }
    return dom;
}

// Pooled 0-1-loss ERM: per-atom empirical majority over all samples,
// equivalent to exhaustive search over the 2^K labelings. Ties and unseen
// atoms get label 0.
inline DiscreteClassifier erm_pooled(const std::vector<MassartDomain>& domains) {
    require(!domains.empty(), "erm_pooled: no domains");
    const std::size_t k = domains.front().bayes.atoms();
    std::vector<std::int64_t> ones(k, 0), totals(k, 0);
    std::size_t pooled = 0;
    for (const auto& dom : domains) {
        require(dom.bayes.atoms() == k, "erm_pooled: atom count mismatch");
        for (const auto& [atom, label] : dom.samples) {
            ones[static_cast<std::size_t>(atom)] += label;
            ++totals[static_cast<std::size_t>(atom)];
            ++pooled;
        }
    }
    require(pooled > 0, "erm_pooled: pooled sample is empty");
    DiscreteClassifier hat;
    hat.labels.resize(k);
    hat.mu = domains.front().bayes.mu;
    for (std::size_t a = 0; a < k; ++a)
        hat.labels[a] = 2 * ones[a] > totals[a] ? 1 : 0;
    return hat;
}

// Fraction of Bayes classifiers at exact L1 distance >= eps from hat.
inline double empirical_lhs(const DiscreteClassifier& hat,
                            const std::vector<DiscreteClassifier>& bayes_set, double eps) {
    require(!bayes_set.empty(), "empirical_lhs: empty classifier set");
    std::size_t far = 0;
    for (const auto& b : bayes_set)
        if (classifier_distance(hat, b) >= eps) ++far;
    return static_cast<double>(far) / static_cast<double>(bayes_set.size());
}

// ---------------------------------------------------------------------------
// Experiment harness
// ---------------------------------------------------------------------------

enum class NoiseMode { massart, clean };

inline NoiseMode parse_noise_mode(const std::string& s) {
    if (s == "massart") return NoiseMode::massart;
    if (s == "clean") return NoiseMode::clean;
    throw validation_error("unknown mode '" + s + "' (want massart or clean)");
}

struct BoundExperimentConfig {
    NoiseMode mode = NoiseMode::massart;
    std::size_t K = 8;
    std::size_t E = 9;
    double m = 0.5;          // massart mode margin
    double target_beta = 0.5;  // massart mode spread
    double tilt = 2.0;         // clean mode sampling tilt
    double x2_fraction = 0.0;
    std::size_t n = 10000;  // samples per domain per trial
    double eps = 0.1;
    double delta = 0.05;
    std::size_t trials = 200;
    std::uint64_t seed = 1;
};

struct TrialRow {
    std::size_t trial = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool violated = false;
};

struct BoundExperimentResult {
    BoundReport bound;
    double alpha = 0.0;
    double realized_beta = 0.0;
    std::vector<TrialRow> trials;
    double mean_lhs = 0.0;
    double violation_freq = 0.0;
};

inline MassartFamily build_family(const BoundExperimentConfig& cfg) {
    if (cfg.mode == NoiseMode::massart)
        return make_domains(cfg.K, cfg.E, cfg.m, cfg.target_beta, cfg.seed, cfg.x2_fraction);
    return make_clean_domains(cfg.K, cfg.E, cfg.tilt, cfg.seed);
}

inline BoundExperimentResult run_bound_experiment(const BoundExperimentConfig& cfg) {
    require(cfg.trials >= 1, "run_bound_experiment: need at least one trial");
    const MassartFamily fam = build_family(cfg);
    if (!std::isfinite(fam.alpha))
        throw validation_error("run_bound_experiment: infinite shift (alpha), bound undefined");

    BoundExperimentResult res;
    res.alpha = fam.alpha;
    res.realized_beta = fam.realized_beta;
    res.bound = cfg.mode == NoiseMode::massart
                    ? rhs_t2(fam.realized_beta, fam.m, static_cast<int>(cfg.E), cfg.delta)
                    : rhs_t1(fam.alpha, static_cast<int>(cfg.E), cfg.delta);

    std::vector<DiscreteClassifier> bayes;
    bayes.reserve(fam.domains.size());
    for (const auto& dom : fam.domains) bayes.push_back(dom.bayes);

    double lhs_sum = 0.0;
    std::size_t violations = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        // Label seeds depend only on (seed, trial, domain), so sweeps over
        // beta reuse the same randomness: paired trials by construction.
        std::vector<MassartDomain> drawn;
        drawn.reserve(fam.domains.size());
        for (std::size_t e = 0; e < fam.domains.size(); ++e)
            drawn.push_back(sample_labels(fam.domains[e], cfg.n,
                                          derive_seed(derive_seed(cfg.seed, 0x747269616cULL, t),
                                                      e, 1)));
        const DiscreteClassifier hat = erm_pooled(drawn);
        const double lhs = empirical_lhs(hat, bayes, cfg.eps);
        const bool violated = lhs > res.bound.rhs;
        res.trials.push_back({t, lhs, res.bound.rhs, violated});
        lhs_sum += lhs;
        violations += violated ? 1 : 0;
    }
    res.mean_lhs = lhs_sum / static_cast<double>(cfg.trials);
    res.violation_freq = static_cast<double>(violations) / static_cast<double>(cfg.trials);
    return res;
}

struct BetaSweepRow {
    double target_beta = 0.0;
    double realized_beta = 0.0;
    double alpha = 0.0;
    double rhs = 0.0;
    bool feasible = false;
    double mean_lhs = 0.0;
    double violation_freq = 0.0;
};

// Runs the massart-mode experiment across a beta grid with the same master
// seed everywhere (paired trials).
inline std::vector<BetaSweepRow> beta_sweep(BoundExperimentConfig cfg,
                                            const std::vector<double>& betas) {
    require(!betas.empty(), "beta_sweep: empty grid");
    cfg.mode = NoiseMode::massart;
    std::vector<BetaSweepRow> rows;
    rows.reserve(betas.size());
    for (double b : betas) {
        cfg.target_beta = b;
        const BoundExperimentResult res = run_bound_experiment(cfg);
        rows.push_back({b, res.realized_beta, res.alpha, res.bound.rhs, res.bound.feasible,
                        res.mean_lhs, res.violation_freq});
    }
    return rows;
}

}  // namespace shiftlab
