#pragma once

// HMC chain driver: full momentum/velocity refresh, stepsize randomization
// eps ~ eps_bar * U[0.8, 1], proposal integration and Metropolis correction.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "integrators.hpp"
#include "rng.hpp"

namespace splithmc {

struct ChainStreams {
    RngStream momentum;
    RngStream stepsize;
    RngStream accept;

    // Streams base+0, base+1, base+2 of the seed; base 1 gives the documented
    // allocation (1 momentum, 2 stepsize, 3 acceptance).
    static ChainStreams from_seed(std::uint64_t seed, std::uint64_t base = stream_id::momentum) {
        return ChainStreams{RngStream(seed, base), RngStream(seed, base + 1), RngStream(seed, base + 2)};
    }
};

inline double acceptance_probability(double delta_h) {
    if (std::isnan(delta_h)) return 0.0;
    return delta_h <= 0.0 ? 1.0 : std::exp(-delta_h);
}

struct Transition {
    Vector theta;          // next chain state
    bool accepted = false;
    double delta_h = 0.0;  // H(proposal) - H(start); +inf on divergence
    double accept_prob = 0.0;
    double eps = 0.0;
    std::size_t grad_evals = 0;
    bool diverged = false;
    PhaseState start;      // (theta, xi)
    PhaseState proposal;
};

template <Potential T>
PhaseState refresh(const Vector& theta, IntegratorKind kind, const SplitPotential<T>& split, RngStream& momentum) {
    Vector z = momentum.normal(theta.size());
    if (is_preconditioned(kind))
        return PhaseState{theta, chol_sample_velocity(split.reference().chol, z), Convention::velocity};
    return PhaseState{theta, std::move(z), Convention::momentum};
}

template <Potential T>
Transition hmc_step(const Vector& theta, const IntegratorSpec& spec, const SplitPotential<T>& split,
                    ChainStreams& streams) {
    Transition t;
    t.start = refresh(theta, spec.kind, split, streams.momentum);
    t.eps = spec.eps_bar * streams.stepsize.uniform(0.8, 1.0);
    auto traj = trajectory(spec, t.start, t.eps, split);
    t.grad_evals = traj.grad_evals;
    t.diverged = traj.diverged;
    t.proposal = std::move(traj.state);
    if (!t.diverged) {
        t.delta_h = hamiltonian(split, t.proposal) - hamiltonian(split, t.start);
        if (!std::isfinite(t.delta_h)) t.diverged = true;
    }
    if (t.diverged) t.delta_h = std::numeric_limits<double>::infinity();
    t.accept_prob = acceptance_probability(t.delta_h);
    t.accepted = streams.accept.bernoulli(t.accept_prob);
    t.theta = t.accepted ? t.proposal.theta : theta;
    return t;
}

struct ChainConfig {
    IntegratorSpec spec;
    std::size_t n_samples = 1000;
    std::uint64_t seed = 0;
    std::optional<Vector> initial_theta;  // default: theta*
    std::size_t discard = 0;              // transitions run before recording
    std::uint64_t stream_base = stream_id::momentum;
};

struct ChainOutput {
    Matrix samples;  // n_samples x d
    std::vector<std::uint8_t> accepted;
    std::vector<double> energy_errors;
    std::vector<double> accept_probs;
    std::size_t grad_evals = 0;
    std::size_t divergences = 0;
    double wall_seconds = 0.0;

    std::size_t size() const { return accepted.size(); }

    double acceptance_rate() const {
        if (accepted.empty()) return 0.0;
        std::size_t n = 0;
        for (auto a : accepted) n += a;
        return static_cast<double>(n) / static_cast<double>(accepted.size());
    }

    double mean_accept_prob() const {
        if (accept_probs.empty()) return 0.0;
        double s = 0.0;
        for (double a : accept_probs) s += a;
        return s / static_cast<double>(accept_probs.size());
    }
};

// The first recorded sample is the state after the first (post-discard)
// transition; the starting point itself is not recorded.
template <Potential T>
ChainOutput run_chain(const ChainConfig& cfg, const SplitPotential<T>& split) {
    cfg.spec.validate();
    if (cfg.n_samples < 1) throw std::invalid_argument("run_chain: n_samples must be >= 1");
    Vector theta = cfg.initial_theta ? *cfg.initial_theta : split.reference().theta_star;
    require_same_size(split.dim(), theta.size(), "run_chain");
    auto streams = ChainStreams::from_seed(cfg.seed, cfg.stream_base);

    ChainOutput out;
    out.samples.resize(static_cast<Index>(cfg.n_samples), split.dim());
    out.accepted.reserve(cfg.n_samples);
    out.energy_errors.reserve(cfg.n_samples);
    out.accept_probs.reserve(cfg.n_samples);

    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < cfg.discard + cfg.n_samples; ++k) {
        auto t = hmc_step(theta, cfg.spec, split, streams);
        theta = std::move(t.theta);
        if (k < cfg.discard) continue;
        out.samples.row(static_cast<Index>(k - cfg.discard)) = theta.transpose();
        out.accepted.push_back(t.accepted ? 1 : 0);
        out.energy_errors.push_back(t.delta_h);
        out.accept_probs.push_back(t.accept_prob);
        out.grad_evals += t.grad_evals;
        out.divergences += t.diverged ? 1 : 0;
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// CSV: theta_0..theta_{d-1},accepted,delta_h
inline void write_chain_csv(std::ostream& os, const ChainOutput& chain) {
    const Index d = chain.samples.cols();
    for (Index j = 0; j < d; ++j) os << "theta_" << j << ',';
    os << "accepted,delta_h\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < chain.size(); ++k) {
        for (Index j = 0; j < d; ++j) os << chain.samples(static_cast<Index>(k), j) << ',';
        os << int(chain.accepted[k]) << ',' << chain.energy_errors[k] << '\n';
    }
}

// Binary layout (little-endian host order): u64 d, u64 n, then n*d f64
// row-major samples, n u8 flags, n f64 energy errors.
inline void write_chain_binary(std::ostream& os, const ChainOutput& chain) {
    const std::uint64_t d = static_cast<std::uint64_t>(chain.samples.cols());
    const std::uint64_t n = chain.size();
    os.write(reinterpret_cast<const char*>(&d), sizeof d);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (std::uint64_t k = 0; k < n; ++k)
        for (std::uint64_t j = 0; j < d; ++j) {
            const double v = chain.samples(static_cast<Index>(k), static_cast<Index>(j));
            os.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    os.write(reinterpret_cast<const char*>(chain.accepted.data()), static_cast<std::streamsize>(n));
    os.write(reinterpret_cast<const char*>(chain.energy_errors.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

inline ChainOutput read_chain_binary(std::istream& is) {
    std::uint64_t d = 0, n = 0;
    is.read(reinterpret_cast<char*>(&d), sizeof d);
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!is) throw std::runtime_error("read_chain_binary: truncated header");
    ChainOutput out;
    out.samples.resize(static_cast<Index>(n), static_cast<Index>(d));
    for (std::uint64_t k = 0; k < n; ++k)
        for (std::uint64_t j = 0; j < d; ++j) {
            double v = 0.0;
            is.read(reinterpret_cast<char*>(&v), sizeof v);
            out.samples(static_cast<Index>(k), static_cast<Index>(j)) = v;
        }
    out.accepted.resize(n);
    out.energy_errors.resize(n);
    is.read(reinterpret_cast<char*>(out.accepted.data()), static_cast<std::streamsize>(n));
    is.read(reinterpret_cast<char*>(out.energy_errors.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("read_chain_binary: truncated body");
    return out;
}

} // namespace splithmc
