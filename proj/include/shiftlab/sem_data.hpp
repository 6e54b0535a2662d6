#pragma once

// Multi-domain regression data from the two-block structural equation model:
// per domain e, with std multipliers (sa, sb, sc),
//
//   zc   = sa * G1                      (n x d causal block)
//   eps  = orthogonalize(sb * G2, zc)   (label noise, flat-projected off zc)
//   ye   = gamma ⊙ zc + eps             (gamma broadcast across rows)
//   ze   = ye + sc * G3                 (n x d spurious block)
//   X    = [zc | ze],  Y = rowsum(ye)
//
// The orthogonalization uses the scalar dot product over the flattened
// matrices, so sum(eps ⊙ zc) == 0 exactly per domain.
//
// Persistence: env{i}.csv files (2d feature columns then Y, header 0..2d)
// plus true_gamma.csv (single column, gamma then d zeros).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shiftlab/common.hpp"
#include "shiftlab/csv.hpp"
#include "shiftlab/linalg.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

struct GammaVector {
    Vector values;

    std::size_t dim() const { return values.size(); }
};

// Per-domain standard-deviation multipliers of the three Gaussian sources.
struct EnvSpec {
    int env_id = 0;
    double sa = 1.0;  // std of zc entries
    double sb = 1.0;  // std of raw label noise
    double sc = 1.0;  // std of the spurious perturbation

    void validate() const {
        require(sa >= 0.0 && sb >= 0.0 && sc >= 0.0,
                "EnvSpec: scale multipliers must be nonnegative");
    }
};

struct DomainDataset {
    int env_id = 0;
    Matrix x;  // n x 2d, columns [0, d) = zc, [d, 2d) = ze
    Vector y;  // length n

    std::size_t n() const { return x.rows(); }
    std::size_t dim() const { return x.cols() / 2; }
};

struct MultiDomainDataset {
    GammaVector gamma;
    std::vector<DomainDataset> domains;
};

// Generation debris kept for label re-derivation checks.
struct DomainSample {
    DomainDataset data;
    Matrix zc;
    Matrix eps_orth;
};

inline GammaVector make_gamma(std::size_t d, std::uint64_t seed) {
    if (d == 0) throw validation_error("make_gamma: dimension must be >= 1");
    Rng rng(derive_seed(seed, 0x67616d6d61ULL, 0));  // dedicated gamma stream
    GammaVector g;
    g.values.resize(d);
    for (double& v : g.values) v = rng.next_normal();
    return g;
}

// noise - (sum(zc ⊙ noise) / sum(zc ⊙ zc)) * zc, flattened scalar projection.
inline Matrix orthogonalize(const Matrix& noise, const Matrix& zc) {
    require(noise.rows() == zc.rows() && noise.cols() == zc.cols(),
            "orthogonalize: shape mismatch");
    double dot = 0.0, zz = 0.0;
    auto nf = noise.flat();
    auto zf = zc.flat();
    for (std::size_t i = 0; i < zf.size(); ++i) {
        dot += zf[i] * nf[i];
        zz += zf[i] * zf[i];
    }
    if (zz == 0.0) throw numeric_error("orthogonalize: zc is identically zero");
    const double coef = dot / zz;
    Matrix out(noise.rows(), noise.cols());
    auto of = out.flat();
    for (std::size_t i = 0; i < zf.size(); ++i) of[i] = nf[i] - coef * zf[i];
    return out;
}

namespace detail {

inline Matrix normal_matrix(std::size_t n, std::size_t d, double scale, Rng& rng) {
    Matrix m(n, d);
    auto f = m.flat();
    for (double& v : f) v = scale * rng.next_normal();
    return m;
}

}  // namespace detail

inline DomainSample sample_domain_debug(const GammaVector& gamma, std::size_t n,
                                        const EnvSpec& spec, std::uint64_t seed) {
    require(n >= 1, "sample_domain: n must be >= 1");
    require(gamma.dim() >= 1, "sample_domain: gamma must be nonempty");
    spec.validate();
    const std::size_t d = gamma.dim();
    const auto id = static_cast<std::uint64_t>(spec.env_id);

    Rng g1(derive_seed(seed, id, 0));
    Rng g2(derive_seed(seed, id, 1));
    Rng g3(derive_seed(seed, id, 2));

    Matrix zc = detail::normal_matrix(n, d, spec.sa, g1);
    Matrix raw_noise = detail::normal_matrix(n, d, spec.sb, g2);

    // A zero noise matrix is orthogonal to anything; skipping the projection
    // keeps the sb = 0 (realizable) case well defined even when sa = 0.
    bool noise_zero = true;
    for (double v : raw_noise.flat()) {
        if (v != 0.0) {
            noise_zero = false;
            break;
        }
    }
    Matrix eps = noise_zero ? std::move(raw_noise) : orthogonalize(raw_noise, zc);

    DomainSample out;
    out.data.env_id = spec.env_id;
    out.data.x = Matrix(n, 2 * d);
    out.data.y.assign(n, 0.0);
    Matrix g3m = detail::normal_matrix(n, d, spec.sc, g3);
    for (std::size_t i = 0; i < n; ++i) {
        double ysum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double ye = gamma.values[j] * zc(i, j) + eps(i, j);
            out.data.x(i, j) = zc(i, j);
            out.data.x(i, d + j) = ye + g3m(i, j);
            ysum += ye;
        }
        out.data.y[i] = ysum;
    }
    if (!all_finite(out.data.x.flat()) || !all_finite(out.data.y))
        throw numeric_error("sample_domain: generated non-finite values");
    out.zc = std::move(zc);
    out.eps_orth = std::move(eps);
    return out;
}

inline DomainDataset sample_domain(const GammaVector& gamma, std::size_t n,
                                   const EnvSpec& spec, std::uint64_t seed) {
    return sample_domain_debug(gamma, n, spec, seed).data;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

// Two readings of the per-domain scale e:
//   paper_text: variances a = c = e with b = 1   => sa = sc = sqrt(e), sb = 1
//   listing1:   every source scaled by std e     => sa = sb = sc = e
enum class Scaling { paper_text, listing1 };

inline Scaling parse_scaling(const std::string& s) {
    if (s == "paper-text") return Scaling::paper_text;
    if (s == "listing1") return Scaling::listing1;
    throw validation_error("unknown scaling '" + s + "' (want paper-text or listing1)");
}

inline EnvSpec scaled_env(int env_id, Scaling scaling) {
    const double e = static_cast<double>(env_id);
    EnvSpec spec;
    spec.env_id = env_id;
    if (scaling == Scaling::paper_text) {
        spec.sa = std::sqrt(e);
        spec.sb = 1.0;
        spec.sc = std::sqrt(e);
    } else {
        spec.sa = e;
        spec.sb = e;
        spec.sc = e;
    }
    return spec;
}

// D1: envs {1..3}; D2: envs {1..30}; 10^4 samples per domain.
inline std::vector<EnvSpec> preset_envs(int count, Scaling scaling) {
    require(count >= 1, "preset_envs: need at least one environment");
    std::vector<EnvSpec> envs;
    envs.reserve(static_cast<std::size_t>(count));
    for (int e = 1; e <= count; ++e) envs.push_back(scaled_env(e, scaling));
    return envs;
}

inline constexpr int kD1Domains = 3;
inline constexpr int kD2Domains = 30;
inline constexpr std::size_t kSamplesPerDomain = 10000;

inline MultiDomainDataset generate_dataset(const GammaVector& gamma,
                                           const std::vector<EnvSpec>& envs, std::size_t n,
                                           std::uint64_t seed) {
    require(!envs.empty(), "generate_dataset: empty environment list");
    for (std::size_t i = 0; i < envs.size(); ++i)
        for (std::size_t j = i + 1; j < envs.size(); ++j)
            require(envs[i].env_id != envs[j].env_id,
                    "generate_dataset: duplicate env_id " + std::to_string(envs[i].env_id));
    MultiDomainDataset ds;
    ds.gamma = gamma;
    ds.domains.reserve(envs.size());
    for (const auto& spec : envs) ds.domains.push_back(sample_domain(gamma, n, spec, seed));
    return ds;
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

inline void write_dataset(const MultiDomainDataset& ds, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const std::size_t d = ds.gamma.dim();

    {
        auto out = csv::open_out(dir / "true_gamma.csv");
        out << "0\n";
        for (double v : ds.gamma.values) out << csv::format_double(v) << '\n';
        for (std::size_t j = 0; j < d; ++j) out << csv::format_double(0.0) << '\n';
    }
    for (std::size_t i = 0; i < ds.domains.size(); ++i) {
        const auto& dom = ds.domains[i];
        auto out = csv::open_out(dir / ("env" + std::to_string(i + 1) + ".csv"));
        const std::size_t cols = dom.x.cols() + 1;
        for (std::size_t j = 0; j < cols; ++j) {
            if (j) out << ',';
            out << j;
        }
        out << '\n';
        std::vector<double> row(cols);
        for (std::size_t r = 0; r < dom.n(); ++r) {
            auto xr = dom.x.row(r);
            std::copy(xr.begin(), xr.end(), row.begin());
            row[cols - 1] = dom.y[r];
            csv::write_row(out, row);
        }
    }
}

// Loads env1.csv, env2.csv, ... (consecutive from 1) plus true_gamma.csv.
// Domain ids are positional, matching the writer's layout.
inline MultiDomainDataset read_dataset(const std::filesystem::path& dir) {
    const auto gamma_path = dir / "true_gamma.csv";
    if (!std::filesystem::exists(gamma_path))
        throw io_error("missing file " + gamma_path.string());
    csv::Table gt = csv::read_table(gamma_path);
    if (gt.header.size() != 1)
        throw io_error(gamma_path.string() + ":1: expected a single column");
    if (gt.rows.size() % 2 != 0)
        throw io_error(gamma_path.string() + ": expected 2d rows (gamma then zeros)");
    const std::size_t d = gt.rows.size() / 2;
    if (d == 0) throw io_error(gamma_path.string() + ": empty coefficient vector");

    MultiDomainDataset ds;
    ds.gamma.values.resize(d);
    for (std::size_t j = 0; j < d; ++j) ds.gamma.values[j] = gt.number_at(j, 0);

    for (int i = 1;; ++i) {
        const auto path = dir / ("env" + std::to_string(i) + ".csv");
        if (!std::filesystem::exists(path)) {
            if (i == 1) throw io_error("missing file " + path.string());
            break;
        }
        csv::Table t = csv::read_table(path);
        if (t.header.size() != 2 * d + 1)
            throw io_error(path.string() + ":1: expected " + std::to_string(2 * d + 1) +
                           " columns, got " + std::to_string(t.header.size()));
        if (t.rows.empty()) throw io_error(path.string() + ": no data rows");
        DomainDataset dom;
        dom.env_id = i;
        dom.x = Matrix(t.rows.size(), 2 * d);
        dom.y.resize(t.rows.size());
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            for (std::size_t j = 0; j < 2 * d; ++j) dom.x(r, j) = t.number_at(r, j);
            dom.y[r] = t.number_at(r, 2 * d);
        }
        ds.domains.push_back(std::move(dom));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Correlated single-coordinate sampler (d = 1, no orthogonalization)
// ---------------------------------------------------------------------------

// Draws (x, y) from the d = 1 model with Cov(z1, eps2) = p and
// Cov(eps1, eps2) = q, for cross-checking the closed-form solution when the
// independence shortcuts do not apply. Requires a feasible covariance:
// c - p^2/a - q^2/b > 0.
inline DomainDataset sample_example1_correlated(double a, double b, double c, double gamma,
                                                double p, double q, std::size_t n,
                                                std::uint64_t seed) {
    require(a > 0.0 && b > 0.0 && c > 0.0, "sample_example1_correlated: variances must be > 0");
    const double resid = c - p * p / a - q * q / b;
    require(resid >= 0.0, "sample_example1_correlated: (p, q) infeasible for variance c");
    Rng rng(derive_seed(seed, 0x636f7272ULL, 0));
    DomainDataset dom;
    dom.env_id = 0;
    dom.x = Matrix(n, 2);
    dom.y.resize(n);
    const double sa = std::sqrt(a), sb = std::sqrt(b), sr = std::sqrt(resid);
    for (std::size_t i = 0; i < n; ++i) {
        const double g1 = rng.next_normal(), g2 = rng.next_normal(), g3 = rng.next_normal();
        const double z1 = sa * g1;
        const double e1 = sb * g2;
        const double e2 = (p / sa) * g1 + (q / sb) * g2 + sr * g3;
        const double y = gamma * z1 + e1;
        dom.x(i, 0) = z1;
        dom.x(i, 1) = y + e2;
        dom.y[i] = y;
    }
    return dom;
}

}  // namespace shiftlab
