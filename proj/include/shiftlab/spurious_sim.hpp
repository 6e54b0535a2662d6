#pragma once

// Feature-level spurious-correlation simulator: a causal shape signal and
// a spurious color bit. Per sample,
//
//   true class z ~ Bernoulli(1/2)
//   shape       = (2z - 1) + N(0, 1)
//   observed Y  = z flipped with probability 0.25 (the label-noise ceiling)
//   color       = Y flipped with probability e
//
// so a color-blind model can reach at most 75% observed-label accuracy
// while the color rule reaches 1 - e on domain e. A pooled linear-logistic
// model trained over domains with small e learns the color shortcut; the
// shift sweep measures how widening |e2 - e1| pushes it back toward the
// shape signal.

#include <cmath>
#include <cstdint>
#include <vector>

#include "shiftlab/common.hpp"
#include "shiftlab/linalg.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

struct ColoredDomain {
    double e = 0.0;                         // color-label disagreement rate
    Matrix x;                               // n x 2: column 0 shape, column 1 color bit
    std::vector<std::uint8_t> y;            // observed labels
    std::vector<std::uint8_t> true_class;   // generative z, kept for oracle evaluation

    std::size_t n() const { return x.rows(); }
};

struct LogisticModel {
    double w_shape = 0.0;
    double w_color = 0.0;
    double bias = 0.0;
};

inline constexpr double kLabelNoise = 0.25;

inline ColoredDomain gen_colored_domain(double e, std::size_t n, std::uint64_t seed,
                                        double label_noise = kLabelNoise,
                                        double shape_noise_sd = 1.0) {
    require(e >= 0.0 && e <= 1.0, "gen_colored_domain: e must be in [0, 1]");
    require(n >= 1, "gen_colored_domain: n must be >= 1");
    require(label_noise >= 0.0 && label_noise <= 1.0, "gen_colored_domain: bad label noise");
    require(shape_noise_sd >= 0.0, "gen_colored_domain: bad shape noise");
    Rng rng(derive_seed(seed, 0x636f6c6f72ULL, static_cast<std::uint64_t>(e * 1e9)));
    ColoredDomain dom;
    dom.e = e;
    dom.x = Matrix(n, 2);
    dom.y.resize(n);
    dom.true_class.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t z = rng.next_bernoulli(0.5) ? 1 : 0;
        dom.x(i, 0) = (2.0 * z - 1.0) + shape_noise_sd * rng.next_normal();
        const std::uint8_t y = rng.next_bernoulli(label_noise) ? (1 - z) : z;
        const std::uint8_t color = rng.next_bernoulli(e) ? (1 - y) : y;
        dom.x(i, 1) = static_cast<double>(color);
        dom.y[i] = y;
        dom.true_class[i] = z;
    }
    return dom;
}

// Pinned training recipe: 2000 full-batch gradient steps on the pooled
// log-loss, learning rate 0.1, zero init. Deterministic; the seed
// parameter is kept for interface parity with stochastic trainers.
struct LogisticSettings {
    int epochs = 2000;
    double lr = 0.1;
};

inline LogisticModel train(const std::vector<ColoredDomain>& domains,
                           const LogisticSettings& cfg = {},
                           [[maybe_unused]] std::uint64_t seed = 0) {
    require(!domains.empty(), "train: no domains");
    std::size_t total = 0;
    for (const auto& dom : domains) total += dom.n();
    const double inv_n = 1.0 / static_cast<double>(total);

    LogisticModel model;
    for (int step = 0; step < cfg.epochs; ++step) {
        double gs = 0.0, gc = 0.0, gb = 0.0;
        for (const auto& dom : domains) {
            for (std::size_t i = 0; i < dom.n(); ++i) {
                const double s = dom.x(i, 0), c = dom.x(i, 1);
                const double logit = model.w_shape * s + model.w_color * c + model.bias;
                const double p = 1.0 / (1.0 + std::exp(-logit));
                const double r = p - static_cast<double>(dom.y[i]);
                gs += r * s;
                gc += r * c;
                gb += r;
            }
        }
        model.w_shape -= cfg.lr * gs * inv_n;
        model.w_color -= cfg.lr * gc * inv_n;
        model.bias -= cfg.lr * gb * inv_n;
        if (!std::isfinite(model.w_shape) || !std::isfinite(model.w_color) ||
            !std::isfinite(model.bias))
            throw numeric_error("train: diverged");
    }
    return model;
}

namespace detail {

inline std::uint8_t predict(const LogisticModel& m, double shape, double color) {
    return m.w_shape * shape + m.w_color * color + m.bias >= 0.0 ? 1 : 0;
}

}  // namespace detail

// Accuracy on the domain as generated.
inline double eval_factual(const LogisticModel& model, const ColoredDomain& dom) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < dom.n(); ++i)
        if (detail::predict(model, dom.x(i, 0), dom.x(i, 1)) == dom.y[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(dom.n());
}

// Accuracy after flipping the color bit of every test point.
inline double eval_counterfactual(const LogisticModel& model, const ColoredDomain& dom) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < dom.n(); ++i)
        if (detail::predict(model, dom.x(i, 0), 1.0 - dom.x(i, 1)) == dom.y[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(dom.n());
}

struct CounterfactualReport {
    double factual = 0.0;
    double counterfactual = 0.0;
    double gap = 0.0;               // |CF - F|
    bool exceeds_tolerance = false; // gap beyond the 25% label-noise allowance
};

inline CounterfactualReport counterfactual_report(const LogisticModel& model,
                                                  const ColoredDomain& dom) {
    CounterfactualReport rep;
    rep.factual = eval_factual(model, dom);
    rep.counterfactual = eval_counterfactual(model, dom);
    rep.gap = std::abs(rep.counterfactual - rep.factual);
    rep.exceeds_tolerance = rep.gap > kLabelNoise;
    return rep;
}

// Reference rules evaluated directly against the stored generative state.
inline double oracle_shape_accuracy(const ColoredDomain& dom) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < dom.n(); ++i)
        if (dom.true_class[i] == dom.y[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(dom.n());
}

inline double color_rule_accuracy(const ColoredDomain& dom) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < dom.n(); ++i)
        if (static_cast<std::uint8_t>(dom.x(i, 1)) == dom.y[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(dom.n());
}

// ---------------------------------------------------------------------------
// Shift sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    std::size_t trial = 0;
    double e1 = 0.0;
    double e2 = 0.0;
    double dv = 0.0;  // |e2 - e1|
    double y_un = 0.0;
    double y_e1 = 0.0;
    double cf_gap_un = 0.0;
    double cf_gap_e1 = 0.0;
};

// For each grid point and trial: train on {e1, e2}, evaluate on the unseen
// domain e_test and on e1. Within a trial the e1 and test domains are drawn
// once and shared across the whole grid, so grid points differ only in the
// second training domain.
inline std::vector<SweepRow> shift_sweep(double e1, const std::vector<double>& e2_grid,
                                         double e_test, std::size_t n, std::size_t trials,
                                         std::uint64_t seed) {
    require(!e2_grid.empty(), "shift_sweep: empty grid");
    require(trials >= 1, "shift_sweep: need at least one trial");
    std::vector<SweepRow> rows;
    rows.reserve(e2_grid.size() * trials);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = derive_seed(seed, 0x7377656570ULL, t);
        for (std::size_t g = 0; g < e2_grid.size(); ++g) {
            const double e2 = e2_grid[g];
            const ColoredDomain d1 = gen_colored_domain(e1, n, derive_seed(trial_seed, 1, 0));
            const ColoredDomain d2 =
                gen_colored_domain(e2, n, derive_seed(trial_seed, 2, g + 1));
            const ColoredDomain dt =
                gen_colored_domain(e_test, n, derive_seed(trial_seed, 3, 0));
            const LogisticModel model = train({d1, d2});
            SweepRow row;
            row.trial = t;
            row.e1 = e1;
            row.e2 = e2;
            row.dv = std::abs(e2 - e1);
            row.y_un = eval_factual(model, dt);
            row.y_e1 = eval_factual(model, d1);
            row.cf_gap_un = counterfactual_report(model, dt).gap;
            row.cf_gap_e1 = counterfactual_report(model, d1).gap;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace shiftlab
