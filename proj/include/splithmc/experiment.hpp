#pragma once

// Experiment runner: target construction, protocol resolution (explicit or
// principled), chain execution and artifact output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagnostics.hpp"
#include "integrators.hpp"
#include "precompute.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "split_potential.hpp"
#include "targets.hpp"

namespace splithmc {

enum class ChainFormat { csv, binary };

struct ExperimentConfig {
    std::string dataset = "simdata";  // "simdata", a known name looked up in data_dir, or a path
    Index sim_n = 10000;
    Index sim_dim = 100;  // d - 1
    double sim_gamma2 = 1.0;
    std::optional<std::uint64_t> data_seed;  // defaults to seed
    double prior_variance = 25.0;

    IntegratorKind method = IntegratorKind::precond_rkr;
    std::optional<double> eps_bar;
    std::optional<int> steps;
    bool principled = false;
    std::string label;

    std::size_t n_samples = 50000;
    std::size_t discard = 0;
    std::uint64_t seed = 1;
    std::size_t pilot_samples = 2000;
    double target_accept = 0.65;
    int max_sweep_steps = 512;

    std::filesystem::path out = "out";
    std::filesystem::path data_dir = "data";
    std::optional<std::filesystem::path> cache_dir;
    ChainFormat chain_format = ChainFormat::csv;
    bool deterministic = false;  // omit wall-clock fields so artifacts replay byte-for-byte
    std::size_t acf_max_lag = 200;

    // Appendix-style spectra/acceptance sweep.
    std::vector<Index> bvm_n{128, 256, 512, 1024, 2048, 4096, 8192, 16384};
    std::size_t bvm_samples = 2000;
    Index fisher_mc = 1000000;

    std::uint64_t dataset_seed() const { return data_seed ? *data_seed : seed; }

    void validate() const {
        if (principled && (eps_bar || steps))
            throw std::invalid_argument("config: principled protocol and explicit eps_bar/steps are mutually exclusive");
        if (!principled && !(eps_bar && steps))
            throw std::invalid_argument("config: set both eps_bar and steps, or choose the principled protocol");
        if (eps_bar) IntegratorSpec{method, *eps_bar, *steps}.validate();
        if (n_samples < 50) throw std::invalid_argument("config: samples must be >= 50 for IAC estimation");
        if (!(prior_variance > 0.0)) throw std::invalid_argument("config: prior_variance must be positive");
        if (!(target_accept > 0.0 && target_accept < 1.0))
            throw std::invalid_argument("config: target_accept must lie in (0, 1)");
        if (pilot_samples < 1) throw std::invalid_argument("config: pilot_samples must be >= 1");
        if (!std::is_sorted(bvm_n.begin(), bvm_n.end()) || bvm_n.empty() || bvm_n.front() < 1)
            throw std::invalid_argument("config: bvm_n must be a non-empty ascending list of positive sizes");
    }
};

namespace detail {

inline std::string trim_copy(std::string_view s) { return std::string(trim(s)); }

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

template <class N>
N parse_number(const std::string& v, const std::string& key) {
    std::istringstream is(v);
    N out{};
    is >> out;
    if (!is || !is.eof()) throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

} // namespace detail

// Applies one key=value setting.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& v) {
    using detail::parse_number;
    if (key == "dataset") cfg.dataset = v;
    else if (key == "sim_n") cfg.sim_n = parse_number<Index>(v, key);
    else if (key == "sim_dim") cfg.sim_dim = parse_number<Index>(v, key);
    else if (key == "sim_gamma2") cfg.sim_gamma2 = parse_number<double>(v, key);
    else if (key == "data_seed") cfg.data_seed = parse_number<std::uint64_t>(v, key);
    else if (key == "prior_variance") cfg.prior_variance = parse_number<double>(v, key);
    else if (key == "method") cfg.method = parse_integrator_kind(v);
    else if (key == "eps_bar") cfg.eps_bar = parse_number<double>(v, key);
    else if (key == "steps") cfg.steps = parse_number<int>(v, key);
    else if (key == "principled") cfg.principled = detail::parse_bool(v, key);
    else if (key == "label") cfg.label = v;
    else if (key == "samples") cfg.n_samples = parse_number<std::size_t>(v, key);
    else if (key == "discard") cfg.discard = parse_number<std::size_t>(v, key);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(v, key);
    else if (key == "pilot_samples") cfg.pilot_samples = parse_number<std::size_t>(v, key);
    else if (key == "target_accept") cfg.target_accept = parse_number<double>(v, key);
    else if (key == "max_sweep_steps") cfg.max_sweep_steps = parse_number<int>(v, key);
    else if (key == "out") cfg.out = v;
    else if (key == "data_dir") cfg.data_dir = v;
    else if (key == "cache_dir") cfg.cache_dir = v;
    else if (key == "chain_format") {
        if (v == "csv") cfg.chain_format = ChainFormat::csv;
        else if (v == "binary") cfg.chain_format = ChainFormat::binary;
        else throw std::invalid_argument("config: chain_format must be csv or binary");
    } else if (key == "deterministic") cfg.deterministic = detail::parse_bool(v, key);
    else if (key == "acf_max_lag") cfg.acf_max_lag = parse_number<std::size_t>(v, key);
    else if (key == "bvm_n") {
        cfg.bvm_n.clear();
        for (auto tok : detail::split(v, ',')) cfg.bvm_n.push_back(parse_number<Index>(detail::trim_copy(tok), key));
    } else if (key == "bvm_samples") cfg.bvm_samples = parse_number<std::size_t>(v, key);
    else if (key == "fisher_mc") cfg.fisher_mc = parse_number<Index>(v, key);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

// "key = value" lines; '#' starts a comment.
inline void parse_config(std::istream& in, ExperimentConfig& cfg) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim_copy(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(cfg, detail::trim_copy(std::string_view(t).substr(0, eq)),
                          detail::trim_copy(std::string_view(t).substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    parse_config(in, cfg);
    return cfg;
}

struct LoadedTarget {
    LogisticPosterior posterior;
    std::optional<Vector> true_theta;  // simulated data only
    std::string description;
};

inline LoadedTarget load_target(const ExperimentConfig& cfg) {
    if (cfg.dataset == "simdata") {
        RngStream data(cfg.dataset_seed(), stream_id::data);
        auto sim = generate_simdata(data, cfg.sim_n, cfg.sim_dim, cfg.sim_gamma2);
        std::ostringstream desc;
        desc << "simdata(n=" << cfg.sim_n << ", d-1=" << cfg.sim_dim << ", gamma2=" << cfg.sim_gamma2
             << ", seed=" << cfg.dataset_seed() << ")";
        return {LogisticPosterior(std::move(sim.data), cfg.prior_variance), std::move(sim.true_theta), desc.str()};
    }
    std::filesystem::path path = cfg.dataset;
    if (known_dataset_shape(cfg.dataset)) {
        const auto json = cfg.data_dir / (cfg.dataset + ".json");
        path = std::filesystem::exists(json) ? json : cfg.data_dir / (cfg.dataset + ".csv");
    }
    auto ds = load_dataset(path);
    if (auto shape = known_dataset_shape(cfg.dataset);
        shape && (ds.size() != shape->n || ds.features() != shape->d_minus_1)) {
        std::ostringstream msg;
        msg << path.string() << ": expected " << shape->n << " rows x " << shape->d_minus_1 << " features, got "
            << ds.size() << " x " << ds.features();
        throw DatasetParseError(msg.str());
    }
    return {LogisticPosterior(std::move(ds), cfg.prior_variance), std::nullopt, path.string()};
}

inline QuadraticReference reference_for(const LogisticPosterior& target, const ExperimentConfig& cfg) {
    std::optional<std::filesystem::path> cache;
    std::string key;
    if (cfg.cache_dir) {
        key = reference_cache_key(dataset_fingerprint(target.data()), target.prior_variance());
        cache = *cfg.cache_dir / ("reference-" + key + ".json");
        if (auto ref = load_reference(*cache, key)) return std::move(*ref);
    }
    auto ref = build_reference(target);
    if (cache) {
        std::filesystem::create_directories(*cfg.cache_dir);
        save_reference(*cache, ref, key);
    }
    return ref;
}

// T = pi / (2 omega_min) without preconditioning, pi / 2 with it.
inline double principled_duration(IntegratorKind kind, const QuadraticReference& ref) {
    return is_preconditioned(kind) ? std::numbers::pi / 2 : std::numbers::pi / (2.0 * ref.omega_min());
}

// Step counts k of the sweep eps_bar = T / k: 1, 2, 3, 4, 6, 8, 12, 16, 24, ...
inline std::vector<int> sweep_steps(int max_steps) {
    std::vector<int> out;
    for (int p = 1; p <= max_steps; p *= 2) {
        out.push_back(p);
        if (p >= 2 && p + p / 2 <= max_steps) out.push_back(p + p / 2);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct SweepPoint {
    double eps_bar;
    int steps;
    double acceptance;
};

struct ResolvedProtocol {
    double eps_bar = 0.0;
    int steps = 0;
    double duration = 0.0;
    bool principled = false;
    std::vector<SweepPoint> sweep;
};

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Explicit settings pass through. The principled sweep runs pilot chains from
// theta* (pilot k on streams 16+4k+{1,2,3}) from the longest stepsize down and
// keeps the first that reaches the target acceptance.
template <Potential T>
ResolvedProtocol resolve_protocol(const ExperimentConfig& cfg, const SplitPotential<T>& split) {
    ResolvedProtocol r;
    if (!cfg.principled) {
        r.eps_bar = *cfg.eps_bar;
        r.steps = *cfg.steps;
        r.duration = r.eps_bar * r.steps;
        return r;
    }
    r.principled = true;
    r.duration = principled_duration(cfg.method, split.reference());
    const auto ks = sweep_steps(cfg.max_sweep_steps);
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const int k = ks[i];
        ChainConfig pilot;
        pilot.spec = IntegratorSpec{cfg.method, r.duration / k, k};
        pilot.n_samples = cfg.pilot_samples;
        pilot.seed = cfg.seed;
        pilot.stream_base = stream_id::pilot_base + 4 * i + 1;
        const auto chain = run_chain(pilot, split);
        r.sweep.push_back({pilot.spec.eps_bar, pilot.spec.steps, chain.acceptance_rate()});
        if (chain.acceptance_rate() >= cfg.target_accept) {
            r.eps_bar = pilot.spec.eps_bar;
            r.steps = pilot.spec.steps;
            return r;
        }
    }
    std::ostringstream msg;
    msg << "resolve_protocol: no stepsize reached acceptance " << cfg.target_accept << " for "
        << display_name(cfg.method) << " (T = " << r.duration << "); sweep:";
    for (const auto& p : r.sweep) msg << "\n  eps_bar=" << p.eps_bar << " L=" << p.steps << " acceptance=" << p.acceptance;
    throw ProtocolError(msg.str());
}

struct ExperimentResult {
    RunReport report;
    ResolvedProtocol protocol;
    double omega_min = 0.0;
    double omega_max = 0.0;
    nlohmann::json json;
};

namespace detail {

inline std::ofstream open_artifact(const std::filesystem::path& path, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

} // namespace detail

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["dataset"] = cfg.dataset;
    if (cfg.dataset == "simdata")
        j["simdata"] = {{"n", cfg.sim_n}, {"d_minus_1", cfg.sim_dim}, {"gamma2", cfg.sim_gamma2},
                        {"seed", cfg.dataset_seed()}};
    j["prior_variance"] = cfg.prior_variance;
    j["method"] = std::string(short_name(cfg.method));
    j["principled"] = cfg.principled;
    j["n_samples"] = cfg.n_samples;
    j["discard"] = cfg.discard;
    j["seed"] = cfg.seed;
    if (cfg.principled) {
        j["pilot_samples"] = cfg.pilot_samples;
        j["target_accept"] = cfg.target_accept;
    }
    return j;
}

// Builds target and reference, resolves the protocol, runs the chain and
// writes report.json, table_row.txt, the chain file and acf_<observable>.csv
// into cfg.out.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto loaded = load_target(cfg);
    const auto& target = loaded.posterior;
    const auto ref = reference_for(target, cfg);
    const SplitPotential split(target, ref);

    ExperimentResult res;
    res.omega_min = ref.omega_min();
    res.omega_max = ref.omega_max();
    res.protocol = resolve_protocol(cfg, split);

    ChainConfig cc;
    cc.spec = IntegratorSpec{cfg.method, res.protocol.eps_bar, res.protocol.steps};
    cc.n_samples = cfg.n_samples;
    cc.seed = cfg.seed;
    cc.discard = cfg.discard;
    const auto chain = run_chain(cc, split);

    const RunMeta meta{cfg.method, res.protocol.steps, res.protocol.eps_bar, res.protocol.eps_bar * res.protocol.steps,
                       cfg.label};
    res.report = report(chain, target, meta);
    if (cfg.deterministic) res.report.wall_ms_per_sample.reset();

    auto& j = res.json;
    j = to_json(res.report);
    j["config"] = config_json(cfg);
    j["dataset_description"] = loaded.description;
    j["dimension"] = ref.dim();
    j["omega_min"] = res.omega_min;
    j["omega_max"] = res.omega_max;
    j["protocol"] = {{"mode", res.protocol.principled ? "principled" : "explicit"},
                     {"eps_bar", res.protocol.eps_bar},
                     {"L", res.protocol.steps},
                     {"T", res.protocol.eps_bar * res.protocol.steps},
                     {"T_target", res.protocol.duration}};
    nlohmann::json sweep = nlohmann::json::array();
    for (const auto& p : res.protocol.sweep)
        sweep.push_back({{"eps_bar", p.eps_bar}, {"L", p.steps}, {"acceptance", p.acceptance}});
    j["protocol"]["sweep"] = sweep;

    std::filesystem::create_directories(cfg.out);
    detail::open_artifact(cfg.out / "report.json") << j.dump(2) << '\n';
    detail::open_artifact(cfg.out / "table_row.txt") << table_header() << '\n' << table_row(res.report) << '\n';
    if (cfg.chain_format == ChainFormat::csv) {
        auto os = detail::open_artifact(cfg.out / "chain.csv");
        write_chain_csv(os, chain);
    } else {
        auto os = detail::open_artifact(cfg.out / "chain.bin", true);
        write_chain_binary(os, chain);
    }
    for (const auto& s : observables(chain, target)) {
        auto os = detail::open_artifact(cfg.out / ("acf_" + s.name + ".csv"));
        write_acf_csv(os, autocorrelation(s.values), cfg.acf_max_lag);
    }
    return res;
}

// Fixed step counts of the n sweep.
inline int bvm_steps(IntegratorKind kind) {
    switch (kind) {
    case IntegratorKind::precond_krk:
    case IntegratorKind::precond_rkr: return 2;
    case IntegratorKind::precond_verlet: return 3;
    case IntegratorKind::kdk:
    case IntegratorKind::uncond_krk: return 30;
    }
    return 1;
}

struct BvmPoint {
    Index n = 0;
    Vector omega_scaled;   // omega_j / sqrt(n), ascending
    Vector sqrt_fisher;    // sqrt of the Fisher eigenvalues, ascending
    double max_abs_dev = 0.0;
    double rel_dev = 0.0;  // max_abs_dev / max sqrt_fisher
    struct Run {
        IntegratorKind kind;
        int steps;
        double eps_bar;
        double acceptance;
        double mean_accept_prob;
    };
    std::vector<Run> runs;
};

// Datasets for all n are prefixes of one draw of the largest size, so they
// share the true parameters; the Fisher information is estimated once.
inline std::vector<BvmPoint> run_bvm_experiment(const ExperimentConfig& cfg) {
    if (cfg.dataset != "simdata") throw std::invalid_argument("run_bvm_experiment: requires dataset = simdata");
    if (cfg.bvm_n.empty() || !std::is_sorted(cfg.bvm_n.begin(), cfg.bvm_n.end()))
        throw std::invalid_argument("run_bvm_experiment: bvm_n must be ascending");
    RngStream data(cfg.dataset_seed(), stream_id::data);
    const auto sim = generate_simdata(data, cfg.bvm_n.back(), cfg.sim_dim, cfg.sim_gamma2);
    RngStream fs(cfg.dataset_seed(), stream_id::fisher);
    const auto fisher = fisher_info_mc(sim.true_theta, fs, cfg.fisher_mc, simdata_feature_variances(cfg.sim_dim));
    const Vector sqrt_fisher = sym_eigen(fisher).D.cwiseSqrt();

    std::vector<BvmPoint> out;
    for (Index n : cfg.bvm_n) {
        const LogisticPosterior target(sim.data.head(n), cfg.prior_variance);
        const auto ref = build_reference(target);
        const SplitPotential split(target, ref);
        BvmPoint pt;
        pt.n = n;
        pt.omega_scaled = ref.omega / std::sqrt(static_cast<double>(n));
        pt.sqrt_fisher = sqrt_fisher;
        pt.max_abs_dev = (pt.omega_scaled - sqrt_fisher).cwiseAbs().maxCoeff();
        pt.rel_dev = pt.max_abs_dev / sqrt_fisher.maxCoeff();
        for (auto kind : all_integrator_kinds) {
            ChainConfig cc;
            cc.spec.kind = kind;
            cc.spec.steps = bvm_steps(kind);
            cc.spec.eps_bar = principled_duration(kind, ref) / cc.spec.steps;
            cc.n_samples = cfg.bvm_samples;
            cc.seed = cfg.seed;
            const auto chain = run_chain(cc, split);
            pt.runs.push_back({kind, cc.spec.steps, cc.spec.eps_bar, chain.acceptance_rate(), chain.mean_accept_prob()});
        }
        out.push_back(std::move(pt));
    }
    return out;
}

inline void write_bvm_spectra_csv(std::ostream& os, const std::vector<BvmPoint>& pts) {
    os << "n,j,omega_over_sqrt_n,sqrt_fisher_eigenvalue\n" << std::setprecision(17);
    for (const auto& p : pts)
        for (Index j = 0; j < p.omega_scaled.size(); ++j)
            os << p.n << ',' << j << ',' << p.omega_scaled(j) << ',' << p.sqrt_fisher(j) << '\n';
}

inline void write_bvm_acceptance_csv(std::ostream& os, const std::vector<BvmPoint>& pts) {
    os << "n,method,L,eps_bar,T,acceptance,mean_accept_prob\n" << std::setprecision(17);
    for (const auto& p : pts)
        for (const auto& r : p.runs)
            os << p.n << ',' << display_name(r.kind) << ',' << r.steps << ',' << r.eps_bar << ',' << r.eps_bar * r.steps
               << ',' << r.acceptance << ',' << r.mean_accept_prob << '\n';
}

inline void write_bvm_deviation_csv(std::ostream& os, const std::vector<BvmPoint>& pts) {
    os << "n,max_abs_deviation,relative_deviation\n" << std::setprecision(17);
    for (const auto& p : pts) os << p.n << ',' << p.max_abs_dev << ',' << p.rel_dev << '\n';
}

inline void write_bvm_artifacts(const std::filesystem::path& dir, const std::vector<BvmPoint>& pts) {
    std::filesystem::create_directories(dir);
    auto s = detail::open_artifact(dir / "spectra.csv");
    write_bvm_spectra_csv(s, pts);
    auto a = detail::open_artifact(dir / "acceptance.csv");
    write_bvm_acceptance_csv(a, pts);
    auto d = detail::open_artifact(dir / "deviation.csv");
    write_bvm_deviation_csv(d, pts);
}

} // namespace splithmc
