// shiftlab: command-line front end for the distribution-shift experiments.
//
// Subcommands: gen | fit | shift | bounds | massart | colored | sweep | hyptest.
// A TOML config (--config) supplies defaults; explicit flags win. The master
// seed resolves as flag > config [run].seed > $SHIFTLAB_SEED > 1. Every
// file-writing run appends a line to run_manifest.csv next to its outputs
// (timestamp kept in its own column so data files stay byte-identical).
//
// Exit codes: 0 ok, 2 config/validation, 3 numerical, 4 I/O.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <type_traits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shiftlab/bounds.hpp"
#include "shiftlab/csv.hpp"
#include "shiftlab/divergence.hpp"
#include "shiftlab/experiment_config.hpp"
#include "shiftlab/hyptest.hpp"
#include "shiftlab/massart_sim.hpp"
#include "shiftlab/regression.hpp"
#include "shiftlab/sem_data.hpp"
#include "shiftlab/spurious_sim.hpp"

namespace fs = std::filesystem;
using namespace shiftlab;

namespace {

using KvList = std::vector<std::pair<std::string, std::string>>;

// config value fills in when the flag was not given on the command line
template <typename T, typename Getter>
void config_fallback(const CLI::Option* opt, T& var, const ExperimentConfig& cfg,
                     const std::string& key, Getter get) {
    if (opt != nullptr && opt->count() > 0) return;
    if (cfg.has(key)) var = get(key);
}

void fill_number(const CLI::Option* opt, double& var, const ExperimentConfig& cfg,
                 const std::string& key) {
    config_fallback(opt, var, cfg, key, [&](const std::string& k) { return cfg.number(k); });
}

template <typename Int>
void fill_integer(const CLI::Option* opt, Int& var, const ExperimentConfig& cfg,
                  const std::string& key) {
    config_fallback(opt, var, cfg, key, [&](const std::string& k) {
        const std::int64_t raw = cfg.integer(k);
        if constexpr (std::is_unsigned_v<Int>)
            require(raw >= 0, "config key '" + k + "' must be nonnegative");
        return static_cast<Int>(raw);
    });
}

void fill_string(const CLI::Option* opt, std::string& var, const ExperimentConfig& cfg,
                 const std::string& key) {
    config_fallback(opt, var, cfg, key, [&](const std::string& k) { return cfg.string(k); });
}

void fill_number_array(const CLI::Option* opt, std::vector<double>& var,
                       const ExperimentConfig& cfg, const std::string& key) {
    config_fallback(opt, var, cfg, key,
                    [&](const std::string& k) { return cfg.number_array(k); });
}

std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value,
                           const ExperimentConfig& cfg) {
    if (seed_opt != nullptr && seed_opt->count() > 0) return flag_value;
    if (cfg.has("run.seed")) return static_cast<std::uint64_t>(cfg.integer("run.seed"));
    if (const char* env = std::getenv("SHIFTLAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw validation_error("SHIFTLAB_SEED is not an integer: " + std::string(env));
        }
    }
    return 1;
}

void write_manifest(const fs::path& dir, const std::string& command, const KvList& kv,
                    std::uint64_t seed) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path path = dir / "run_manifest.csv";
    const bool fresh = !fs::exists(path);
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw io_error("cannot write " + path.string());
    if (fresh) out << "command,config_hash,seed,version,timestamp\n";
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(kv)));
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    out << command << ',' << hash << ',' << seed << ',' << kVersion << ',' << now << '\n';
}

std::string fmt(double v) { return csv::format_double(v); }

// stdout unless --out was given
class Sink {
  public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = csv::open_out(path);
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

  private:
    std::ofstream file_;
    std::ostream* out_ = &std::cout;
};

std::vector<EnvSpec> envs_from_selection(const std::string& preset,
                                         const std::vector<double>& custom, Scaling scaling) {
    if (preset == "D1") return preset_envs(kD1Domains, scaling);
    if (preset == "D2") return preset_envs(kD2Domains, scaling);
    if (preset == "custom") {
        require(!custom.empty(), "custom preset needs --envs");
        std::vector<EnvSpec> envs;
        for (double e : custom) {
            require(e > 0.0 && e == std::floor(e), "custom env ids must be positive integers");
            envs.push_back(scaled_env(static_cast<int>(e), scaling));
        }
        return envs;
    }
    throw validation_error("unknown preset '" + preset + "' (want D1, D2 or custom)");
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenArgs {
    std::string preset = "D1";
    std::string scaling = "listing1";
    std::size_t n = kSamplesPerDomain;
    std::size_t d = 20;
    std::vector<double> custom_envs;
    std::string out;
    std::uint64_t seed = 1;
    CLI::Option *preset_opt = nullptr, *scaling_opt = nullptr, *n_opt = nullptr,
                *d_opt = nullptr, *envs_opt = nullptr, *seed_opt = nullptr;
};

int run_gen(GenArgs& a, const ExperimentConfig& cfg) {
    fill_string(a.preset_opt, a.preset, cfg, "gen.preset");
    fill_string(a.scaling_opt, a.scaling, cfg, "gen.scaling");
    fill_integer(a.n_opt, a.n, cfg, "gen.n");
    fill_integer(a.d_opt, a.d, cfg, "gen.d");
    fill_number_array(a.envs_opt, a.custom_envs, cfg, "gen.envs");
    a.seed = resolve_seed(a.seed_opt, a.seed, cfg);

    const Scaling scaling = parse_scaling(a.scaling);
    const auto envs = envs_from_selection(a.preset, a.custom_envs, scaling);
    const GammaVector gamma = make_gamma(a.d, a.seed);
    const MultiDomainDataset ds = generate_dataset(gamma, envs, a.n, a.seed);
    write_dataset(ds, a.out);

    KvList kv{{"preset", a.preset}, {"scaling", a.scaling}, {"n", std::to_string(a.n)},
              {"d", std::to_string(a.d)}};
    write_manifest(a.out, "gen", kv, a.seed);
    std::cout << "wrote " << envs.size() << " domains (n=" << a.n << ", d=" << a.d << ") to "
              << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string data;
    std::string method = "normal-eq";
    std::string out;
    std::string weights_out;
    CLI::Option *data_opt = nullptr, *method_opt = nullptr;
};

int run_fit(FitArgs& a, const ExperimentConfig& cfg) {
    fill_string(a.data_opt, a.data, cfg, "fit.data");
    fill_string(a.method_opt, a.method, cfg, "fit.method");
    require(!a.data.empty(), "fit: --data is required");

    const MultiDomainDataset ds = read_dataset(a.data);
    const FitMethod method = parse_fit_method(a.method);
    const OlsFit fit = pooled_fit(ds, method);
    fit.weights.validate();

    const Weights truth = weights_from_gamma(ds.gamma);
    double l2 = 0.0;
    for (std::size_t j = 0; j < truth.w.size(); ++j) {
        const double dj = fit.weights.w[j] - truth.w[j];
        l2 += dj * dj;
    }
    const Matrix mu = standard_mu_sample(truth.w.size());
    const double l1 = l1_distance(fit.weights, truth, mu);

    auto block_l2 = [](std::span<const double> xs) {
        double s = 0.0;
        for (double v : xs) s += v * v;
        return std::sqrt(s);
    };
    std::string env_set;
    for (std::size_t i = 0; i < ds.domains.size(); ++i) {
        if (i) env_set += ';';
        env_set += std::to_string(ds.domains[i].env_id);
    }

    Sink sink(a.out);
    sink.stream() << "method,envs,causal_l2,spurious_l2,spurious_mean_abs,l2_dist_gamma,"
                     "l1_dist_gamma,cond,ridged\n"
                  << a.method << ',' << env_set << ','
                  << fmt(block_l2(fit.weights.causal_block())) << ','
                  << fmt(block_l2(fit.weights.spurious_block())) << ','
                  << fmt(mean_abs(fit.weights.spurious_block())) << ',' << fmt(std::sqrt(l2))
                  << ',' << fmt(l1) << ',' << fmt(fit.cond) << ',' << (fit.ridged ? 1 : 0)
                  << '\n';

    if (!a.weights_out.empty()) {
        auto out = csv::open_out(a.weights_out);
        out << "0\n";
        for (double v : fit.weights.w) out << fmt(v) << '\n';
    }
    const std::string manifest_anchor = !a.out.empty() ? a.out : a.weights_out;
    if (!manifest_anchor.empty()) {
        KvList kv{{"data", a.data}, {"method", a.method}};
        write_manifest(fs::path(manifest_anchor).parent_path(), "fit", kv, 0);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// shift
// ---------------------------------------------------------------------------

struct ShiftArgs {
    std::string preset = "D1";
    std::string scaling = "listing1";
    std::string out;
    CLI::Option *preset_opt = nullptr, *scaling_opt = nullptr;
};

int run_shift(ShiftArgs& a, const ExperimentConfig& cfg) {
    fill_string(a.preset_opt, a.preset, cfg, "shift.preset");
    fill_string(a.scaling_opt, a.scaling, cfg, "shift.scaling");

    const auto envs = envs_from_selection(a.preset, {}, parse_scaling(a.scaling));
    std::vector<ShiftDescriptor> descriptors;
    std::vector<int> ids;
    for (const auto& spec : envs) {
        // univariate zc marginal: N(0, sa^2)
        require(spec.sa > 0.0, "shift: zc marginal needs sa > 0");
        descriptors.push_back(GaussianDiagDescriptor{{0.0}, {spec.sa * spec.sa}});
        ids.push_back(spec.env_id);
    }
    const ShiftReport rep = shift_matrix(descriptors, ids);

    Sink sink(a.out);
    auto& out = sink.stream();
    out << "env";
    for (int id : rep.env_ids) out << ',' << id;
    out << '\n';
    for (std::size_t i = 0; i < rep.env_ids.size(); ++i) {
        out << rep.env_ids[i];
        for (std::size_t j = 0; j < rep.env_ids.size(); ++j) out << ',' << fmt(rep.kl(i, j));
        out << '\n';
    }
    out << "alpha," << fmt(rep.alpha) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct BoundsArgs {
    double alpha = 0.0;
    double beta = 0.0;
    double m = 0.5;
    int E = 3;
    double delta = 0.05;
    double eps = 0.0;
    double log_base = 0.0;
    std::string out;
    CLI::Option *alpha_opt = nullptr, *beta_opt = nullptr, *m_opt = nullptr, *e_opt = nullptr,
                *delta_opt = nullptr, *eps_opt = nullptr, *base_opt = nullptr;
};

int run_bounds(const std::string& theorem, BoundsArgs& a, const ExperimentConfig& cfg) {
    fill_number(a.alpha_opt, a.alpha, cfg, "bounds.alpha");
    fill_number(a.beta_opt, a.beta, cfg, "bounds.beta");
    fill_number(a.m_opt, a.m, cfg, "bounds.m");
    fill_integer(a.e_opt, a.E, cfg, "bounds.E");
    fill_number(a.delta_opt, a.delta, cfg, "bounds.delta");
    fill_number(a.eps_opt, a.eps, cfg, "bounds.eps");
    fill_number(a.base_opt, a.log_base, cfg, "bounds.log-base");

    BoundInputs in;
    in.E = a.E;
    in.delta = a.delta;
    in.eps = a.eps;
    if (theorem == "t1")
        in.alpha = a.alpha;
    else {
        in.beta = a.beta;
        in.m = a.m;
    }
    const BoundReport rep = bound_report(in);

    Sink sink(a.out);
    auto& out = sink.stream();
    if (a.log_base > 1.0) {
        // display only; all computation stays in nats
        out << "# display base " << fmt(a.log_base) << ": sigma numerator/denominator scale by "
            << fmt(1.0 / std::log(a.log_base)) << ", values below are in nats\n";
    }
    out << "sigma,rhs,feasible,condition_slack,min_E\n"
        << fmt(rep.sigma) << ',' << fmt(rep.rhs) << ',' << (rep.feasible ? 1 : 0) << ','
        << fmt(rep.condition_slack) << ',' << rep.min_E << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// massart
// ---------------------------------------------------------------------------

struct MassartArgs {
    BoundExperimentConfig cfg;
    std::string mode = "massart";
    std::string out;
    CLI::Option *k_opt = nullptr, *e_opt = nullptr, *m_opt = nullptr, *beta_opt = nullptr,
                *n_opt = nullptr, *eps_opt = nullptr, *delta_opt = nullptr,
                *trials_opt = nullptr, *seed_opt = nullptr, *mode_opt = nullptr,
                *tilt_opt = nullptr, *x2_opt = nullptr;
};

int run_massart(MassartArgs& a, const ExperimentConfig& cfg) {
    fill_integer(a.k_opt, a.cfg.K, cfg, "massart.K");
    fill_integer(a.e_opt, a.cfg.E, cfg, "massart.E");
    fill_number(a.m_opt, a.cfg.m, cfg, "massart.m");
    fill_number(a.beta_opt, a.cfg.target_beta, cfg, "massart.beta");
    fill_integer(a.n_opt, a.cfg.n, cfg, "massart.n");
    fill_number(a.eps_opt, a.cfg.eps, cfg, "massart.eps");
    fill_number(a.delta_opt, a.cfg.delta, cfg, "massart.delta");
    fill_integer(a.trials_opt, a.cfg.trials, cfg, "massart.trials");
    fill_string(a.mode_opt, a.mode, cfg, "massart.mode");
    fill_number(a.tilt_opt, a.cfg.tilt, cfg, "massart.tilt");
    fill_number(a.x2_opt, a.cfg.x2_fraction, cfg, "massart.x2-fraction");
    a.cfg.seed = resolve_seed(a.seed_opt, a.cfg.seed, cfg);
    a.cfg.mode = parse_noise_mode(a.mode);

    const BoundExperimentResult res = run_bound_experiment(a.cfg);

    const std::string summary_header =
        "mode,K,E,m,target_beta,realized_beta,alpha,sigma,rhs,feasible,mean_lhs,"
        "violation_freq,trials,n,eps,delta";
    std::ostringstream summary;
    summary << a.mode << ',' << a.cfg.K << ',' << a.cfg.E << ',' << fmt(a.cfg.m) << ','
            << fmt(a.cfg.target_beta) << ',' << fmt(res.realized_beta) << ',' << fmt(res.alpha)
            << ',' << fmt(res.bound.sigma) << ',' << fmt(res.bound.rhs) << ','
            << (res.bound.feasible ? 1 : 0) << ',' << fmt(res.mean_lhs) << ','
            << fmt(res.violation_freq) << ',' << a.cfg.trials << ',' << a.cfg.n << ','
            << fmt(a.cfg.eps) << ',' << fmt(a.cfg.delta);

    if (!a.out.empty()) {
        auto trials = csv::open_out(fs::path(a.out) / "trials.csv");
        trials << "trial,lhs,rhs,violated\n";
        for (const auto& row : res.trials)
            trials << row.trial << ',' << fmt(row.lhs) << ',' << fmt(row.rhs) << ','
                   << (row.violated ? 1 : 0) << '\n';
        auto sum = csv::open_out(fs::path(a.out) / "summary.csv");
        sum << summary_header << '\n' << summary.str() << '\n';
        KvList kv{{"mode", a.mode},
                  {"K", std::to_string(a.cfg.K)},
                  {"E", std::to_string(a.cfg.E)},
                  {"m", fmt(a.cfg.m)},
                  {"beta", fmt(a.cfg.target_beta)},
                  {"n", std::to_string(a.cfg.n)},
                  {"eps", fmt(a.cfg.eps)},
                  {"delta", fmt(a.cfg.delta)},
                  {"trials", std::to_string(a.cfg.trials)}};
        write_manifest(a.out, "massart", kv, a.cfg.seed);
    }
    std::cout << summary_header << '\n' << summary.str() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// colored
// ---------------------------------------------------------------------------

struct ColoredArgs {
    std::vector<double> train_envs{0.1, 0.5};
    std::vector<double> eval_envs{0.1, 0.5, 0.9};
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    std::string out;
    CLI::Option *envs_opt = nullptr, *eval_opt = nullptr, *n_opt = nullptr, *seed_opt = nullptr;
};

int run_colored(ColoredArgs& a, const ExperimentConfig& cfg) {
    fill_number_array(a.envs_opt, a.train_envs, cfg, "colored.envs");
    fill_integer(a.n_opt, a.n, cfg, "colored.n");
    a.seed = resolve_seed(a.seed_opt, a.seed, cfg);
    require(!a.train_envs.empty(), "colored: need at least one training environment");

    std::vector<ColoredDomain> train_doms;
    for (std::size_t i = 0; i < a.train_envs.size(); ++i)
        train_doms.push_back(
            gen_colored_domain(a.train_envs[i], a.n, derive_seed(a.seed, 100, i)));
    const LogisticModel model = train(train_doms);

    Sink sink(a.out);
    auto& out = sink.stream();
    out << "e,factual,counterfactual,cf_gap,exceeds_tolerance,oracle_shape_acc,"
           "color_rule_acc\n";
    for (std::size_t i = 0; i < a.eval_envs.size(); ++i) {
        const ColoredDomain dom =
            gen_colored_domain(a.eval_envs[i], a.n, derive_seed(a.seed, 200, i));
        const CounterfactualReport rep = counterfactual_report(model, dom);
        out << fmt(a.eval_envs[i]) << ',' << fmt(rep.factual) << ',' << fmt(rep.counterfactual)
            << ',' << fmt(rep.gap) << ',' << (rep.exceeds_tolerance ? 1 : 0) << ','
            << fmt(oracle_shape_accuracy(dom)) << ',' << fmt(color_rule_accuracy(dom)) << '\n';
    }
    std::cerr << "model: w_shape=" << fmt(model.w_shape) << " w_color=" << fmt(model.w_color)
              << " bias=" << fmt(model.bias) << '\n';
    if (!a.out.empty()) {
        KvList kv{{"n", std::to_string(a.n)}};
        write_manifest(fs::path(a.out).parent_path(), "colored", kv, a.seed);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
    double e1 = 0.1;
    std::vector<double> e2_grid{0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55};
    double e_test = 0.9;
    std::size_t n = 5000;
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    std::string out;
    CLI::Option *e1_opt = nullptr, *grid_opt = nullptr, *etest_opt = nullptr, *n_opt = nullptr,
                *trials_opt = nullptr, *seed_opt = nullptr;
};

int run_sweep(SweepArgs& a, const ExperimentConfig& cfg) {
    fill_number(a.e1_opt, a.e1, cfg, "sweep.e1");
    fill_number_array(a.grid_opt, a.e2_grid, cfg, "sweep.e2-grid");
    fill_number(a.etest_opt, a.e_test, cfg, "sweep.e-test");
    fill_integer(a.n_opt, a.n, cfg, "sweep.n");
    fill_integer(a.trials_opt, a.trials, cfg, "sweep.trials");
    a.seed = resolve_seed(a.seed_opt, a.seed, cfg);

    const auto rows = shift_sweep(a.e1, a.e2_grid, a.e_test, a.n, a.trials, a.seed);
    Sink sink(a.out);
    auto& out = sink.stream();
    out << "trial,e1,e2,dv,y_un,y_e1,cf_gap_un,cf_gap_e1\n";
    for (const auto& r : rows)
        out << r.trial << ',' << fmt(r.e1) << ',' << fmt(r.e2) << ',' << fmt(r.dv) << ','
            << fmt(r.y_un) << ',' << fmt(r.y_e1) << ',' << fmt(r.cf_gap_un) << ','
            << fmt(r.cf_gap_e1) << '\n';
    if (!a.out.empty()) {
        KvList kv{{"e1", fmt(a.e1)},
                  {"e_test", fmt(a.e_test)},
                  {"n", std::to_string(a.n)},
                  {"trials", std::to_string(a.trials)}};
        write_manifest(fs::path(a.out).parent_path(), "sweep", kv, a.seed);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// hyptest
// ---------------------------------------------------------------------------

struct HyptestArgs {
    std::string csv_path;
    std::string y_col;
    std::vector<std::string> x_cols;
    bool no_intercept = false;
    std::string out;
    CLI::Option *csv_opt = nullptr, *y_opt = nullptr, *x_opt = nullptr, *ni_opt = nullptr;
};

int run_hyptest(HyptestArgs& a, const ExperimentConfig& cfg) {
    fill_string(a.csv_opt, a.csv_path, cfg, "hyptest.csv");
    fill_string(a.y_opt, a.y_col, cfg, "hyptest.y-col");
    if ((a.x_opt == nullptr || a.x_opt->count() == 0) && cfg.has("hyptest.x-cols"))
        a.x_cols = cfg.string_array("hyptest.x-cols");
    if ((a.ni_opt == nullptr || a.ni_opt->count() == 0) && cfg.has("hyptest.intercept"))
        a.no_intercept = !cfg.boolean("hyptest.intercept");
    require(!a.csv_path.empty(), "hyptest: --csv is required");
    require(!a.y_col.empty(), "hyptest: --y-col is required");
    require(!a.x_cols.empty(), "hyptest: --x-cols is required");

    const csv::Table table = csv::read_table(a.csv_path);
    const Vector y = table.column(a.y_col);
    Matrix x(table.rows.size(), a.x_cols.size());
    for (std::size_t j = 0; j < a.x_cols.size(); ++j) {
        const Vector col = table.column(a.x_cols[j]);
        for (std::size_t i = 0; i < col.size(); ++i) x(i, j) = col[i];
    }
    const TTestReport rep = ols_ttest(x, y, !a.no_intercept, a.x_cols);

    Sink sink(a.out);
    auto& out = sink.stream();
    out << "name,coef,std_err,t,p_value,ci_low,ci_high\n";
    for (const auto& c : rep.coefs)
        out << c.name << ',' << fmt(c.coef) << ',' << fmt(c.std_err) << ',' << fmt(c.t) << ','
            << fmt(c.p) << ',' << fmt(c.ci_low) << ',' << fmt(c.ci_high) << '\n';
    std::cerr << "n=" << rep.n << " k=" << rep.k << " dof=" << rep.dof
              << " residual_variance=" << fmt(rep.residual_variance)
              << " degenerate=" << (rep.degenerate ? 1 : 0) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shiftlab: multi-domain distribution-shift experiments"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "TOML experiment config; explicit flags override");

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a multi-domain SEM dataset");
    gen.preset_opt = gen_cmd->add_option("--preset", gen.preset, "D1 | D2 | custom");
    gen.scaling_opt = gen_cmd->add_option("--scaling", gen.scaling, "paper-text | listing1");
    gen.n_opt = gen_cmd->add_option("--n", gen.n, "samples per domain");
    gen.d_opt = gen_cmd->add_option("--d", gen.d, "causal dimension d");
    gen.envs_opt =
        gen_cmd->add_option("--envs", gen.custom_envs, "custom env ids")->delimiter(',');
    gen.seed_opt = gen_cmd->add_option("--seed", gen.seed, "master seed");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    FitArgs fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "pooled regression fit on a dataset directory");
    fit.data_opt = fit_cmd->add_option("--data", fit.data, "dataset directory");
    fit.method_opt = fit_cmd->add_option("--method", fit.method, "normal-eq | gd");
    fit_cmd->add_option("--out", fit.out, "report CSV path (default stdout)");
    fit_cmd->add_option("--weights-out", fit.weights_out, "weights CSV path");

    ShiftArgs shift;
    CLI::App* shift_cmd =
        app.add_subcommand("shift", "pairwise KL matrix of the preset zc marginals");
    shift.preset_opt = shift_cmd->add_option("--preset", shift.preset, "D1 | D2");
    shift.scaling_opt = shift_cmd->add_option("--scaling", shift.scaling, "paper-text | listing1");
    shift_cmd->add_option("--out", shift.out, "output CSV path (default stdout)");

    BoundsArgs bounds_t1, bounds_t2;
    CLI::App* bounds_cmd = app.add_subcommand("bounds", "evaluate the domain-count bounds");
    bounds_cmd->require_subcommand(1);
    CLI::App* t1_cmd = bounds_cmd->add_subcommand("t1", "clean-family bound from alpha");
    CLI::App* t2_cmd = bounds_cmd->add_subcommand("t2", "massart-family bound from (beta, m)");
    for (auto& [cmd, args] : {std::pair{t1_cmd, &bounds_t1}, std::pair{t2_cmd, &bounds_t2}}) {
        if (cmd == t1_cmd)
            args->alpha_opt = cmd->add_option("--alpha", args->alpha, "sup pairwise KL (nats)");
        else {
            args->beta_opt = cmd->add_option("--beta", args->beta, "sup pairwise L1 distance");
            args->m_opt = cmd->add_option("--m", args->m, "Massart margin in (0,1)");
        }
        args->e_opt = cmd->add_option("--E", args->E, "number of domains");
        args->delta_opt = cmd->add_option("--delta", args->delta, "failure probability");
        args->eps_opt = cmd->add_option("--eps", args->eps, "indicator tolerance (display)");
        args->base_opt = cmd->add_option("--log-base", args->log_base,
                                         "display-only log base; computation stays in nats");
        cmd->add_option("--out", args->out, "output CSV path (default stdout)");
    }

    MassartArgs massart;
    CLI::App* massart_cmd =
        app.add_subcommand("massart", "Monte-Carlo bound verification on a finite atom set");
    massart.k_opt = massart_cmd->add_option("--K", massart.cfg.K, "number of atoms");
    massart.e_opt = massart_cmd->add_option("--E", massart.cfg.E, "number of domains");
    massart.m_opt = massart_cmd->add_option("--m", massart.cfg.m, "Massart margin");
    massart.beta_opt = massart_cmd->add_option("--beta", massart.cfg.target_beta, "target spread");
    massart.n_opt = massart_cmd->add_option("--n", massart.cfg.n, "samples per domain per trial");
    massart.eps_opt = massart_cmd->add_option("--eps", massart.cfg.eps, "indicator tolerance");
    massart.delta_opt = massart_cmd->add_option("--delta", massart.cfg.delta, "bound delta");
    massart.trials_opt = massart_cmd->add_option("--trials", massart.cfg.trials, "trial count");
    massart.seed_opt = massart_cmd->add_option("--seed", massart.cfg.seed, "master seed");
    massart.mode_opt = massart_cmd->add_option("--mode", massart.mode, "massart | clean");
    massart.tilt_opt = massart_cmd->add_option("--tilt", massart.cfg.tilt, "clean-mode mu tilt");
    massart.x2_opt = massart_cmd->add_option("--x2-fraction", massart.cfg.x2_fraction,
                                             "fraction of atoms in the eta = 0 region");
    massart_cmd->add_option("--out", massart.out, "output directory for trials.csv/summary.csv");

    ColoredArgs colored;
    CLI::App* colored_cmd =
        app.add_subcommand("colored", "train on colored domains, factual vs counterfactual");
    colored.envs_opt =
        colored_cmd->add_option("--envs", colored.train_envs, "training e values")->delimiter(',');
    colored.eval_opt =
        colored_cmd->add_option("--eval-envs", colored.eval_envs, "evaluation e values")
            ->delimiter(',');
    colored.n_opt = colored_cmd->add_option("--n", colored.n, "samples per domain");
    colored.seed_opt = colored_cmd->add_option("--seed", colored.seed, "master seed");
    colored_cmd->add_option("--out", colored.out, "output CSV path (default stdout)");

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "shift sweep over the e2 grid");
    sweep.e1_opt = sweep_cmd->add_option("--e1", sweep.e1, "fixed first-domain e");
    sweep.grid_opt =
        sweep_cmd->add_option("--e2-grid", sweep.e2_grid, "second-domain e grid")->delimiter(',');
    sweep.etest_opt = sweep_cmd->add_option("--e-test", sweep.e_test, "unseen-domain e");
    sweep.n_opt = sweep_cmd->add_option("--n", sweep.n, "samples per domain");
    sweep.trials_opt = sweep_cmd->add_option("--trials", sweep.trials, "trials per grid point");
    sweep.seed_opt = sweep_cmd->add_option("--seed", sweep.seed, "master seed");
    sweep_cmd->add_option("--out", sweep.out, "output CSV path (default stdout)");

    HyptestArgs hyp;
    CLI::App* hyp_cmd = app.add_subcommand("hyptest", "OLS t-test table on CSV columns");
    hyp.csv_opt = hyp_cmd->add_option("--csv", hyp.csv_path, "input CSV");
    hyp.y_opt = hyp_cmd->add_option("--y-col", hyp.y_col, "response column");
    hyp.x_opt = hyp_cmd->add_option("--x-cols", hyp.x_cols, "regressor columns")->delimiter(',');
    hyp.ni_opt = hyp_cmd->add_flag("--no-intercept", hyp.no_intercept, "drop the intercept");
    hyp_cmd->add_option("--out", hyp.out, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
        if (app.got_subcommand(gen_cmd)) return run_gen(gen, cfg);
        if (app.got_subcommand(fit_cmd)) return run_fit(fit, cfg);
        if (app.got_subcommand(shift_cmd)) return run_shift(shift, cfg);
        if (app.got_subcommand(bounds_cmd)) {
            const bool is_t1 = bounds_cmd->got_subcommand(t1_cmd);
            return run_bounds(is_t1 ? "t1" : "t2", is_t1 ? bounds_t1 : bounds_t2, cfg);
        }
        if (app.got_subcommand(massart_cmd)) return run_massart(massart, cfg);
        if (app.got_subcommand(colored_cmd)) return run_colored(colored, cfg);
        if (app.got_subcommand(sweep_cmd)) return run_sweep(sweep, cfg);
        if (app.got_subcommand(hyp_cmd)) return run_hyptest(hyp, cfg);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
