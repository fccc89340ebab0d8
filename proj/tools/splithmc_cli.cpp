#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <splithmc/splithmc.hpp>

namespace {

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> dataset;
    std::optional<std::string> method;
    std::optional<std::size_t> samples;
    std::optional<double> eps_bar;
    std::optional<int> steps;
    bool principled = false;
    std::optional<std::string> out;
    bool bvm = false;
    bool deterministic = false;
    std::optional<std::string> chain_format;
    std::optional<std::string> cache_dir;
    std::optional<std::string> label;
    std::optional<std::string> data_dir;
};

splithmc::ExperimentConfig build_config(const Overrides& o) {
    splithmc::ExperimentConfig cfg;
    if (o.config) cfg = splithmc::load_config(*o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.dataset) cfg.dataset = *o.dataset;
    if (o.method) cfg.method = splithmc::parse_integrator_kind(*o.method);
    if (o.samples) cfg.n_samples = *o.samples;
    if (o.eps_bar || o.steps) cfg.principled = false;
    if (o.eps_bar) cfg.eps_bar = *o.eps_bar;
    if (o.steps) cfg.steps = *o.steps;
    if (o.principled) {
        cfg.principled = true;
        cfg.eps_bar.reset();
        cfg.steps.reset();
    }
    if (o.out) cfg.out = *o.out;
    if (o.deterministic) cfg.deterministic = true;
    if (o.chain_format) splithmc::apply_setting(cfg, "chain_format", *o.chain_format);
    if (o.cache_dir) cfg.cache_dir = *o.cache_dir;
    if (o.label) cfg.label = *o.label;
    if (o.data_dir) cfg.data_dir = *o.data_dir;
    return cfg;
}

int run_main(const Overrides& o) {
    auto cfg = build_config(o);
    if (o.bvm) {
        const auto pts = splithmc::run_bvm_experiment(cfg);
        splithmc::write_bvm_artifacts(cfg.out, pts);
        for (const auto& p : pts) {
            std::cout << "n=" << p.n << " rel_dev=" << p.rel_dev;
            for (const auto& r : p.runs) std::cout << ' ' << splithmc::short_name(r.kind) << '=' << r.acceptance;
            std::cout << '\n';
        }
        return 0;
    }
    const auto res = splithmc::run_experiment(cfg);
    std::cout << splithmc::table_header() << '\n' << splithmc::table_row(res.report) << '\n';
    std::cout << "omega_min=" << res.omega_min << " omega_max=" << res.omega_max << " T=" << res.report.duration
              << " artifacts in " << cfg.out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split Hamiltonian Monte Carlo experiments for Bayesian logistic regression"};
    app.require_subcommand(0, 1);

    Overrides o;
    app.add_option("--config", o.config, "key = value experiment file")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--dataset", o.dataset, "simdata, statlog, ctg, chess or a CSV/JSON manifest path");
    app.add_option("--method", o.method, "kdk | ukrk | pverlet | pkrk | prkr");
    app.add_option("--samples", o.samples, "number of recorded samples");
    app.add_option("--eps-bar", o.eps_bar, "maximum stepsize (explicit protocol)");
    app.add_option("--steps", o.steps, "steps per proposal L (explicit protocol)");
    app.add_flag("--principled", o.principled, "choose T and eps_bar automatically")->excludes("--eps-bar", "--steps");
    app.add_option("--out", o.out, "output directory");
    app.add_flag("--bvm", o.bvm, "run the spectra / acceptance-versus-n sweep");
    app.add_flag("--deterministic", o.deterministic, "omit wall-clock fields from artifacts");
    app.add_option("--chain-format", o.chain_format, "csv | binary");
    app.add_option("--cache-dir", o.cache_dir, "directory caching (theta*, J) per dataset");
    app.add_option("--label", o.label, "run label shown in the table row");
    app.add_option("--data-dir", o.data_dir, "directory holding named datasets");

    auto* grid = app.add_subcommand("rho-grid", "CSV grid of rho for KRK and RKR, or the stability boundary");
    double eps_lo = 0.01, eps_hi = 3.1, kappa_lo = -0.9, kappa_hi = 10.0;
    int n_eps = 100, n_kappa = 100;
    bool boundary = false;
    std::optional<std::string> grid_out;
    grid->add_option("--eps-min", eps_lo);
    grid->add_option("--eps-max", eps_hi);
    grid->add_option("--kappa-min", kappa_lo);
    grid->add_option("--kappa-max", kappa_hi);
    grid->add_option("--n-eps", n_eps)->check(CLI::PositiveNumber);
    grid->add_option("--n-kappa", n_kappa)->check(CLI::PositiveNumber);
    grid->add_flag("--boundary", boundary, "emit kappa,eps*(KRK/RKR),eps*(KDK) instead");
    grid->add_option("--out", grid_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*grid) {
            std::ofstream file;
            if (grid_out) {
                file.open(*grid_out);
                if (!file) throw std::runtime_error("cannot write " + *grid_out);
            }
            std::ostream& os = grid_out ? file : std::cout;
            if (boundary) splithmc::model::write_stability_boundary(os, kappa_lo, kappa_hi, n_kappa);
            else splithmc::model::write_rho_grid(os, eps_lo, eps_hi, n_eps, kappa_lo, kappa_hi, n_kappa);
            return 0;
        }
        return run_main(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
