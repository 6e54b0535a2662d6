#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "shiftlab/regression.hpp"
#include "shiftlab/sem_data.hpp"

using namespace shiftlab;

TEST_CASE("closed_form_omega reproduces hand-computed values") {
    const OmegaPair w = closed_form_omega({1.0, 1.0, 1.0, 2.0, 0.0, 0.0});
    CHECK(w.w1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w.w2 == doctest::Approx(0.5).epsilon(1e-14));

    // direct substitution with p = 0.1
    const OmegaPair wp = closed_form_omega({1.0, 1.0, 1.0, 1.0, 0.1, 0.0});
    CHECK(wp.w1 == doctest::Approx(0.89 / 1.99).epsilon(1e-12));
    CHECK(wp.w2 == doctest::Approx(1.0 / 1.99).epsilon(1e-12));

    // kappa = 0 must be rejected
    CHECK_THROWS_AS(closed_form_omega({1.0, 0.0, 0.0, 1.0, 0.0, 0.0}), numeric_error);
}

TEST_CASE("closed form with p = q = 0 collapses to approx_omega, a cancels") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double a = 0.1 + 5.0 * rng.next_unit();
        const double b = 0.05 + 3.0 * rng.next_unit();
        const double c = 0.05 + 3.0 * rng.next_unit();
        const double gamma = 4.0 * rng.next_unit() - 2.0;
        const OmegaPair exact = closed_form_omega({a, b, c, gamma, 0.0, 0.0});
        const OmegaPair approx = approx_omega(b, c, gamma);
        CHECK(exact.w1 == doctest::Approx(approx.w1).epsilon(1e-12));
        CHECK(exact.w2 == doctest::Approx(approx.w2).epsilon(1e-12));
        if (gamma != 0.0) CHECK(exact.w1 / gamma + exact.w2 == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("closed form against the Monte-Carlo OLS oracle") {
    // independent path: direct example-1 joint draws + Cramer 2x2 solve
    const std::size_t n = 1000000;
    const DomainDataset dom = sample_example1_correlated(1.0, 1.0, 1.0, 2.0, 0.0, 0.0, n, 5);
    std::vector<double> x1(n), x2(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = dom.x(i, 0);
        x2[i] = dom.x(i, 1);
        y[i] = dom.y[i];
    }
    const oracle::Ols2 mc = oracle::ols2(x1, x2, y);
    CHECK(mc.w1 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(mc.w2 == doctest::Approx(0.5).epsilon(0.01));

    // nonzero p: the appendix form with the gamma p^2 coefficient
    const DomainDataset domp =
        sample_example1_correlated(1.0, 1.0, 1.0, 1.0, 0.1, 0.0, n, 6);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = domp.x(i, 0);
        x2[i] = domp.x(i, 1);
        y[i] = domp.y[i];
    }
    const oracle::Ols2 mcp = oracle::ols2(x1, x2, y);
    const OmegaPair cf = closed_form_omega({1.0, 1.0, 1.0, 1.0, 0.1, 0.0});
    CHECK(mcp.w1 == doctest::Approx(cf.w1).epsilon(0.02));
    CHECK(mcp.w2 == doctest::Approx(cf.w2).epsilon(0.02));
}

TEST_CASE("approx_omega closed-form values") {
    const OmegaPair w = approx_omega(1.0, 1.0, 2.0);
    CHECK(w.w1 == 1.0);
    CHECK(w.w2 == 0.5);

    const OmegaPair tail = approx_omega(1.0, 99.0, 1.0);
    CHECK(tail.w1 == doctest::Approx(0.99).epsilon(1e-14));
    CHECK(tail.w2 == doctest::Approx(0.01).epsilon(1e-14));

    const OmegaPair sym = approx_omega(2.5, 2.5, -3.0);
    CHECK(sym.w1 == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(sym.w2 == doctest::Approx(0.5).epsilon(1e-14));

    CHECK_THROWS_AS(approx_omega(0.0, 0.0, 1.0), numeric_error);
}

TEST_CASE("approx_omega_multi on the D1 and D2 environments") {
    std::vector<std::pair<double, double>> d1;
    for (int e = 1; e <= 3; ++e) d1.emplace_back(1.0, static_cast<double>(e));
    const OmegaPair w1 = approx_omega_multi(d1, 1.0);
    CHECK(w1.w2 == doctest::Approx(13.0 / 36.0).epsilon(1e-14));

    std::vector<std::pair<double, double>> d2;
    for (int e = 1; e <= 30; ++e) d2.emplace_back(1.0, static_cast<double>(e));
    const OmegaPair w2 = approx_omega_multi(d2, 1.0);
    double harmonic31 = 0.0;  // independent harmonic-sum oracle
    for (int k = 1; k <= 31; ++k) harmonic31 += 1.0 / static_cast<double>(k);
    CHECK(w2.w2 == doctest::Approx((harmonic31 - 1.0) / 30.0).epsilon(1e-12));
    CHECK(w2.w2 == doctest::Approx(0.1009).epsilon(1e-3));

    const OmegaPair single = approx_omega_multi({{2.0, 3.0}}, 1.5);
    const OmegaPair direct = approx_omega(2.0, 3.0, 1.5);
    CHECK(single.w1 == doctest::Approx(direct.w1).epsilon(1e-15));
    CHECK(single.w2 == doctest::Approx(direct.w2).epsilon(1e-15));

    CHECK_THROWS_AS(approx_omega_multi({}, 1.0), validation_error);
}

TEST_CASE("ols_fit exact small systems") {
    Matrix eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1.0;
    const OlsFit fit = ols_fit(eye, {2.0, 3.0});
    CHECK(fit.weights.w[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.weights.w[1] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(!fit.ridged);

    Matrix column(2, 1);
    column(0, 0) = 1.0;
    column(1, 0) = 2.0;
    const OlsFit line = ols_fit(column, {2.0, 4.0});
    CHECK(line.weights.w[0] == doctest::Approx(2.0).epsilon(1e-14));

    CHECK_THROWS_AS(ols_fit(Matrix(1, 2), {1.0}), validation_error);  // rows < cols

    // rank deficiency beyond the ridge fallback: an all-zero design has
    // zero trace, so the ridge cannot rescue it
    CHECK_THROWS_AS(ols_fit(Matrix(4, 2), {1.0, 2.0, 3.0, 4.0}), numeric_error);
}

TEST_CASE("approx_omega_multi rejects a degenerate domain") {
    CHECK_THROWS_AS(approx_omega_multi({{1.0, 1.0}, {0.0, 0.0}}, 1.0), numeric_error);
}

TEST_CASE("ols_fit concentrates to the population solution") {
    GammaVector g;
    g.values = {0.7};
    const DomainDataset dom = sample_domain(g, 100000, EnvSpec{1, 1.0, 1.0, 1.0}, 17);
    const OlsFit fit = ols_fit(dom.x, dom.y);
    const OmegaPair pop = approx_omega(1.0, 1.0, 0.7);
    CHECK(fit.weights.w[0] == doctest::Approx(pop.w1).epsilon(0.03));
    CHECK(std::abs(fit.weights.w[1] - pop.w2) < 0.02);
}

TEST_CASE("ols_fit residual orthogonality") {
    Rng rng(23);
    Matrix x(300, 4);
    Vector y(300);
    for (double& v : x.flat()) v = rng.next_normal();
    for (double& v : y) v = rng.next_normal() * 2.0 + 1.0;
    const OlsFit fit = ols_fit(x, y);

    double xinf = 0.0, yinf = 0.0;
    for (double v : x.flat()) xinf = std::max(xinf, std::abs(v));
    for (double v : y) yinf = std::max(yinf, std::abs(v));
    for (std::size_t j = 0; j < 4; ++j) {
        double corr = 0.0;
        for (std::size_t i = 0; i < 300; ++i) {
            double pred = 0.0;
            for (std::size_t jj = 0; jj < 4; ++jj) pred += x(i, jj) * fit.weights.w[jj];
            corr += x(i, j) * (y[i] - pred);
        }
        CHECK(std::abs(corr) <= 1e-8 * xinf * yinf * 300);
    }
}

TEST_CASE("pooled_fit single domain equals ols_fit") {
    const GammaVector g = make_gamma(3, 3);
    MultiDomainDataset ds;
    ds.gamma = g;
    ds.domains.push_back(sample_domain(g, 2000, scaled_env(2, Scaling::paper_text), 5));
    const OlsFit pooled = pooled_fit(ds, FitMethod::normal_eq);
    const OlsFit direct = ols_fit(ds.domains[0].x, ds.domains[0].y);
    CHECK(pooled.weights.w == direct.weights.w);
}

TEST_CASE("pooled_fit realizable case recovers gamma exactly") {
    // sb = 0: Y is generated by gamma with no noise, so the pooled solution
    // must interpolate every domain
    for (int domains : {1, 3, 10}) {
        const GammaVector g = make_gamma(5, 41);
        std::vector<EnvSpec> envs;
        for (int e = 1; e <= domains; ++e) {
            EnvSpec spec = scaled_env(e, Scaling::paper_text);
            spec.sb = 0.0;
            envs.push_back(spec);
        }
        const MultiDomainDataset ds = generate_dataset(g, envs, 2000, 71);
        const OlsFit fit = pooled_fit(ds, FitMethod::normal_eq);
        for (std::size_t j = 0; j < g.dim(); ++j) {
            CHECK(std::abs(fit.weights.causal_block()[j] - g.values[j]) < 1e-6);
            CHECK(std::abs(fit.weights.spurious_block()[j]) < 1e-6);
        }
        for (const auto& dom : ds.domains) CHECK(max_abs_residual(dom, fit.weights) <= 1e-8);
    }
}

TEST_CASE("gd path matches the normal equations on D1") {
    const GammaVector g = make_gamma(5, 2);
    const MultiDomainDataset ds =
        generate_dataset(g, preset_envs(3, Scaling::listing1), 10000, 19);
    const OlsFit exact = pooled_fit(ds, FitMethod::normal_eq);
    const OlsFit gd = pooled_fit(ds, FitMethod::gd);
    double gap = 0.0;
    for (std::size_t j = 0; j < exact.weights.w.size(); ++j)
        gap = std::max(gap, std::abs(exact.weights.w[j] - gd.weights.w[j]));
    CHECK(gap < 1e-3);
}

TEST_CASE("monte-carlo OLS converges monotonically toward the closed form") {
    // error at n = 10^6 should beat error at n = 10^4 in nearly every trial
    const OmegaPair target = approx_omega(1.0, 1.0, 0.9);
    int improved = 0;
    const int trials = 60;
    for (int t = 0; t < trials; ++t) {
        auto err = [&](std::size_t n) {
            const DomainDataset dom = sample_example1_correlated(
                1.0, 1.0, 1.0, 0.9, 0.0, 0.0, n, 1000 + static_cast<std::uint64_t>(t));
            std::vector<double> x1(n), x2(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                x1[i] = dom.x(i, 0);
                x2[i] = dom.x(i, 1);
                y[i] = dom.y[i];
            }
            const oracle::Ols2 w = oracle::ols2(x1, x2, y);
            return std::max(std::abs(w.w1 - target.w1), std::abs(w.w2 - target.w2));
        };
        if (err(1000000) < err(10000)) ++improved;
    }
    CHECK(improved >= 57);  // >= 95% of trials
}

TEST_CASE("l1_distance basics and the half-normal oracle") {
    Weights h{{1.0, 0.0}};
    Weights same{{1.0, 0.0}};
    const Matrix mu = standard_mu_sample(2, 1000000);
    CHECK(l1_distance(h, same, mu) == 0.0);

    Weights zero{{0.0, 0.0}};
    // E|x1| for x1 ~ N(0,1) is sqrt(2/pi)
    CHECK(l1_distance(h, zero, mu) ==
          doctest::Approx(std::sqrt(2.0 / 3.14159265358979323846)).epsilon(0.004));

    Weights shorter{{1.0, 0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(l1_distance(h, shorter, mu), validation_error);
}

TEST_CASE("exact discrete variant counts disagreement mass") {
    const std::vector<double> a{1.0, 0.0, 1.0, 1.0};
    const std::vector<double> b{1.0, 0.0, 0.0, 1.0};
    const std::vector<double> mu{0.25, 0.25, 0.25, 0.25};
    CHECK(l1_distance_exact(a, b, mu) == 0.25);
    CHECK(l1_distance_exact(a, a, mu) == 0.0);
}

TEST_CASE("l1_distance is a pseudometric on sampled evaluations") {
    Rng rng(77);
    const Matrix mu = standard_mu_sample(4, 20000, 99);
    for (int rep = 0; rep < 5; ++rep) {
        Weights a, b, c;
        for (int j = 0; j < 4; ++j) {
            a.w.push_back(rng.next_normal());
            b.w.push_back(rng.next_normal());
            c.w.push_back(rng.next_normal());
        }
        const double ab = l1_distance(a, b, mu);
        const double ba = l1_distance(b, a, mu);
        CHECK(ab == ba);  // symmetric exactly: |d| is symmetric pointwise
        const double ac = l1_distance(a, c, mu);
        const double cb = l1_distance(c, b, mu);
        CHECK(ab <= ac + cb + 1e-12);  // triangle holds pointwise
    }
}
