#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "oracles.hpp"
#include "shiftlab/regression.hpp"
#include "shiftlab/sem_data.hpp"

using namespace shiftlab;

namespace {

double frobenius(const Matrix& m) {
    double s = 0.0;
    for (double v : m.flat()) s += v * v;
    return std::sqrt(s);
}

double flat_dot(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    auto fa = a.flat();
    auto fb = b.flat();
    for (std::size_t i = 0; i < fa.size(); ++i) s += fa[i] * fb[i];
    return s;
}

}  // namespace

TEST_CASE("make_gamma is deterministic and validated") {
    const GammaVector a = make_gamma(3, 7);
    const GammaVector b = make_gamma(3, 7);
    CHECK(a.values == b.values);
    CHECK(make_gamma(3, 8).values != a.values);

    const GammaVector one = make_gamma(1, 99);
    CHECK(one.dim() == 1);
    CHECK(std::isfinite(one.values[0]));

    CHECK_THROWS_AS(make_gamma(0, 1), validation_error);
}

TEST_CASE("make_gamma draws look standard normal at d = 20") {
    // 99.9%-level concentration bands for mean and variance of 20 draws
    const GammaVector g = make_gamma(20, 12345);
    CHECK(std::abs(oracle::mean(g.values)) < 3.0 / std::sqrt(20.0));
    const double var = oracle::variance(g.values);
    CHECK(var > 0.3);
    CHECK(var < 2.2);
}

TEST_CASE("orthogonalize projects with the flattened dot product") {
    Rng rng(42);
    Matrix zc(100, 2), noise(100, 2);
    for (double& v : zc.flat()) v = rng.next_normal();
    for (double& v : noise.flat()) v = rng.next_normal();

    const Matrix r = orthogonalize(noise, zc);
    CHECK(std::abs(flat_dot(r, zc)) < 1e-9 * frobenius(noise) * frobenius(zc));

    // noise == zc collapses to the zero matrix
    const Matrix z = orthogonalize(zc, zc);
    for (double v : z.flat()) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));

    // already orthogonal input is returned unchanged
    Matrix base(2, 2), perp(2, 2);
    base(0, 0) = 1.0;
    perp(0, 1) = 1.0;
    CHECK(orthogonalize(perp, base) == perp);

    Matrix zeros(2, 2);
    CHECK_THROWS_AS(orthogonalize(noise, Matrix(100, 2)), numeric_error);
    CHECK_THROWS_AS(orthogonalize(Matrix(3, 2), Matrix(2, 2)), validation_error);
}

TEST_CASE("sample_domain zero scales give all-zero data") {
    const GammaVector g = make_gamma(2, 5);
    EnvSpec spec{1, 0.0, 0.0, 0.0};
    const DomainDataset dom = sample_domain(g, 5, spec, 11);
    for (double v : dom.x.flat()) CHECK(v == 0.0);
    for (double v : dom.y) CHECK(v == 0.0);
}

TEST_CASE("sample_domain rejects bad specs and non-finite output") {
    const GammaVector g = make_gamma(2, 5);
    CHECK_THROWS_AS(sample_domain(g, 0, EnvSpec{1, 1.0, 1.0, 1.0}, 1), validation_error);
    CHECK_THROWS_AS(sample_domain(g, 5, EnvSpec{1, -1.0, 1.0, 1.0}, 1), validation_error);
    // overflowing scale multiplies into infinities
    CHECK_THROWS_AS(sample_domain(g, 5, EnvSpec{1, 1e308, 1e308, 1.0}, 1), numeric_error);
}

TEST_CASE("noise-free realizable domain is fit exactly (ridge path)") {
    GammaVector g;
    g.values = {1.0};
    EnvSpec spec{1, 1.0, 0.0, 0.0};
    const DomainDataset dom = sample_domain(g, 10000, spec, 3);
    // sb = sc = 0 makes ze identical to zc, so Y equals the zc column and the
    // duplicated design exercises the ridge fallback
    for (std::size_t i = 0; i < dom.n(); ++i) {
        CHECK(dom.y[i] == doctest::Approx(dom.x(i, 0)).epsilon(1e-12));
        CHECK(dom.x(i, 1) == dom.x(i, 0));
    }
    const OlsFit fit = ols_fit(dom.x, dom.y);
    CHECK(fit.ridged);
    CHECK(max_abs_residual(dom, fit.weights) < 1e-6);
}

TEST_CASE("sample_domain matches the variance oracle on a D1 environment") {
    const std::size_t n = 10000, d = 20;
    const GammaVector g = make_gamma(d, 2024);
    const EnvSpec spec = scaled_env(1, Scaling::listing1);
    const DomainSample s = sample_domain_debug(g, n, spec, 77);

    CHECK(std::abs(flat_dot(s.eps_orth, s.zc)) < 1e-6);

    double expected = 0.0;
    const double nd = static_cast<double>(n * d);
    for (std::size_t j = 0; j < d; ++j)
        expected += g.values[j] * g.values[j] * spec.sa * spec.sa +
                    spec.sb * spec.sb * (nd - 1.0) / nd;
    const double var = oracle::variance(s.data.y);
    CHECK(var == doctest::Approx(expected).epsilon(0.15));
}

TEST_CASE("generation is bitwise deterministic") {
    const GammaVector g = make_gamma(4, 9);
    const EnvSpec spec = scaled_env(2, Scaling::paper_text);
    const DomainDataset a = sample_domain(g, 500, spec, 31);
    const DomainDataset b = sample_domain(g, 500, spec, 31);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    const DomainDataset c = sample_domain(g, 500, spec, 32);
    CHECK(a.x != c.x);
}

TEST_CASE("Y is exactly the row sum of gamma ⊙ zc + eps") {
    const GammaVector g = make_gamma(3, 21);
    const DomainSample s = sample_domain_debug(g, 200, scaled_env(2, Scaling::listing1), 4);
    for (std::size_t i = 0; i < s.data.n(); ++i) {
        double ysum = 0.0;
        for (std::size_t j = 0; j < g.dim(); ++j)
            ysum += g.values[j] * s.zc(i, j) + s.eps_orth(i, j);
        CHECK(s.data.y[i] == ysum);  // same summation order as generation
    }
}

TEST_CASE("scaling presets") {
    const auto paper = preset_envs(3, Scaling::paper_text);
    CHECK(paper.size() == 3);
    CHECK(paper[2].env_id == 3);
    CHECK(paper[2].sa == doctest::Approx(std::sqrt(3.0)));
    CHECK(paper[2].sb == 1.0);
    CHECK(paper[2].sc == doctest::Approx(std::sqrt(3.0)));

    const auto listing = preset_envs(30, Scaling::listing1);
    CHECK(listing.size() == 30);
    CHECK(listing[29].sa == 30.0);
    CHECK(listing[29].sb == 30.0);
    CHECK(listing[29].sc == 30.0);

    CHECK(parse_scaling("paper-text") == Scaling::paper_text);
    CHECK(parse_scaling("listing1") == Scaling::listing1);
    CHECK_THROWS_AS(parse_scaling("bogus"), validation_error);
}

TEST_CASE("generate_dataset rejects duplicate env ids") {
    const GammaVector g = make_gamma(2, 1);
    std::vector<EnvSpec> envs{scaled_env(1, Scaling::listing1), scaled_env(1, Scaling::listing1)};
    CHECK_THROWS_AS(generate_dataset(g, envs, 10, 1), validation_error);
}

TEST_CASE("dataset csv round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "shiftlab_sem_test";
    fs::remove_all(dir);

    const GammaVector g = make_gamma(2, 13);
    MultiDomainDataset ds = generate_dataset(g, preset_envs(3, Scaling::listing1), 50, 8);
    write_dataset(ds, dir);

    CHECK(fs::exists(dir / "env1.csv"));
    CHECK(fs::exists(dir / "env3.csv"));
    CHECK(fs::exists(dir / "true_gamma.csv"));
    CHECK(!fs::exists(dir / "env4.csv"));

    const MultiDomainDataset back = read_dataset(dir);
    CHECK(back.gamma.values == ds.gamma.values);
    REQUIRE(back.domains.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.domains[i].x == ds.domains[i].x);  // exact round trip
        CHECK(back.domains[i].y == ds.domains[i].y);
        CHECK(back.domains[i].env_id == static_cast<int>(i) + 1);
    }
    fs::remove_all(dir);
}

TEST_CASE("true_gamma.csv layout: gamma then d zeros") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "shiftlab_gamma_test";
    fs::remove_all(dir);

    MultiDomainDataset ds;
    ds.gamma.values = {0.5, -1.5};
    EnvSpec spec = scaled_env(1, Scaling::listing1);
    ds.domains.push_back(sample_domain(ds.gamma, 3, spec, 1));
    write_dataset(ds, dir);

    const csv::Table t = csv::read_table(dir / "true_gamma.csv");
    REQUIRE(t.header.size() == 1);
    CHECK(t.header[0] == "0");
    REQUIRE(t.rows.size() == 4);
    CHECK(t.number_at(0, 0) == 0.5);
    CHECK(t.number_at(1, 0) == -1.5);
    CHECK(t.number_at(2, 0) == 0.0);
    CHECK(t.number_at(3, 0) == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("read_dataset error paths name the offending file") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "shiftlab_sem_errors";
    fs::remove_all(dir);
    fs::create_directories(dir);

    CHECK_THROWS_AS(read_dataset(dir), io_error);  // no true_gamma.csv

    {
        auto out = csv::open_out(dir / "true_gamma.csv");
        out << "0\n1\n0\n";  // odd row count
    }
    CHECK_THROWS_AS(read_dataset(dir), io_error);

    {
        auto out = csv::open_out(dir / "true_gamma.csv");
        out << "0\n1\n0.5\n0\n0\n";
    }
    CHECK_THROWS_AS(read_dataset(dir), io_error);  // env1.csv missing

    {
        auto out = csv::open_out(dir / "env1.csv");
        out << "0,1,2\n1,2,3\n";  // expected 2d+1 = 5 columns
    }
    try {
        read_dataset(dir);
        CHECK(false);
    } catch (const io_error& e) {
        CHECK(std::string(e.what()).find("env1.csv") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("correlated example-1 sampler enforces covariance feasibility") {
    CHECK_THROWS_AS(sample_example1_correlated(1.0, 1.0, 0.5, 1.0, 0.9, 0.9, 10, 1),
                    validation_error);
    const DomainDataset dom = sample_example1_correlated(1.0, 1.0, 1.0, 1.0, 0.1, 0.0, 50000, 3);
    // empirical Cov(z1, z2) should be near gamma*a + p = 1.1
    double c12 = 0.0;
    for (std::size_t i = 0; i < dom.n(); ++i) c12 += dom.x(i, 0) * dom.x(i, 1);
    c12 /= static_cast<double>(dom.n());
    CHECK(c12 == doctest::Approx(1.1).epsilon(0.05));
}
