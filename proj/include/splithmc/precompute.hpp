#pragma once

// Quadratic reference U0(theta) = 1/2 (theta - theta*)^T J (theta - theta*)
// built once per target: MAP point, Hessian there, its eigendecomposition and
// Cholesky factor.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "linalg.hpp"
#include "targets.hpp"

namespace splithmc {

struct QuadraticReference {
    Vector theta_star;
    SymMatrix J;
    EigenDecomp eig;
    CholFactor chol;
    Vector omega;  // sqrt of eig.D, ascending

    Index dim() const { return theta_star.size(); }
    double omega_min() const { return omega(0); }
    double omega_max() const { return omega(omega.size() - 1); }
};

inline QuadraticReference make_reference(Vector theta_star, const SymMatrix& J) {
    require_same_size(J.size(), theta_star.size(), "make_reference");
    QuadraticReference ref{std::move(theta_star), J, sym_eigen(J), cholesky(J), Vector()};
    ref.omega = ref.eig.D.cwiseSqrt();
    return ref;
}

struct MapOptions {
    double gradient_tolerance = 1e-8;
    int max_iterations = 200;
    double armijo_c = 1e-4;
    int max_halvings = 60;
};

struct MapTrace {
    int iterations = 0;
    double final_gradient_norm = 0.0;
    std::vector<double> values;     // U at the start and after every accepted step
    std::vector<double> decreases;  // U(new) - U(old) of every accepted step
};

// Damped Newton: Cholesky-solved steps with Armijo backtracking by halving.
template <Potential T>
Vector find_map(const T& target, Vector theta, const MapOptions& opts = {}, MapTrace* trace = nullptr) {
    require_same_size(target.dim(), theta.size(), "find_map");
    require_finite(theta, "find_map");
    double u = target.value(theta);
    Vector g = target.gradient(theta);
    MapTrace local;
    local.values.push_back(u);
    int it = 0;
    while (g.lpNorm<Eigen::Infinity>() > opts.gradient_tolerance) {
        if (it == opts.max_iterations) {
            std::ostringstream msg;
            msg << "find_map: no convergence after " << opts.max_iterations << " iterations, |grad U|_inf = "
                << g.lpNorm<Eigen::Infinity>();
            throw ConvergenceError(msg.str());
        }
        const Vector step = -chol_solve(cholesky(target.hessian(theta)), g);
        const double slope = g.dot(step);
        // Differences are taken directly: near the optimum the decrease is
        // far below the rounding resolution of U itself.
        double t = 1.0;
        Vector trial = theta + step;
        double du = potential_difference(target, theta, trial);
        int halvings = 0;
        while (!(du <= opts.armijo_c * t * slope)) {
            if (++halvings > opts.max_halvings) {
                std::ostringstream msg;
                msg << "find_map: line search failed at iteration " << it << ", |grad U|_inf = "
                    << g.lpNorm<Eigen::Infinity>();
                throw ConvergenceError(msg.str());
            }
            t *= 0.5;
            trial = theta + t * step;
            du = potential_difference(target, theta, trial);
        }
        theta = std::move(trial);
        u = target.value(theta);
        g = target.gradient(theta);
        local.values.push_back(u);
        local.decreases.push_back(du);
        ++it;
    }
    if (trace) {
        local.iterations = it;
        local.final_gradient_norm = g.lpNorm<Eigen::Infinity>();
        *trace = std::move(local);
    }
    return theta;
}

template <Potential T>
QuadraticReference build_reference(const T& target, std::optional<Vector> theta0 = std::nullopt,
                                   const MapOptions& opts = {}, MapTrace* trace = nullptr) {
    Vector start = theta0 ? *theta0 : Vector::Zero(target.dim());
    Vector theta_star = find_map(target, std::move(start), opts, trace);
    const SymMatrix J = target.hessian(theta_star);
    return make_reference(std::move(theta_star), J);
}

// On-disk cache of (theta*, J), keyed by dataset fingerprint and prior variance.
inline std::string reference_cache_key(std::uint64_t fingerprint, double prior_variance) {
    std::ostringstream key;
    key << std::hex << std::setw(16) << std::setfill('0') << fingerprint << "-" << std::dec
        << std::setprecision(17) << prior_variance;
    return key.str();
}

inline void save_reference(const std::filesystem::path& path, const QuadraticReference& ref,
                           const std::string& key) {
    nlohmann::json j;
    j["key"] = key;
    j["theta_star"] = std::vector<double>(ref.theta_star.data(), ref.theta_star.data() + ref.theta_star.size());
    std::vector<std::vector<double>> rows;
    for (Index i = 0; i < ref.J.size(); ++i) {
        std::vector<double> r;
        for (Index k = 0; k < ref.J.size(); ++k) r.push_back(ref.J(i, k));
        rows.push_back(std::move(r));
    }
    j["J"] = rows;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_reference: cannot write " + path.string());
    out << j.dump() << '\n';
}

// Returns nullopt when the file is missing or its key differs.
inline std::optional<QuadraticReference> load_reference(const std::filesystem::path& path, const std::string& key) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (j.value("key", std::string()) != key) return std::nullopt;
    const auto theta = j.at("theta_star").get<std::vector<double>>();
    const auto rows = j.at("J").get<std::vector<std::vector<double>>>();
    const Index d = static_cast<Index>(theta.size());
    if (static_cast<Index>(rows.size()) != d) return std::nullopt;
    Matrix J(d, d);
    for (Index i = 0; i < d; ++i) {
        if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != d) return std::nullopt;
        for (Index k = 0; k < d; ++k) J(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    return make_reference(Eigen::Map<const Vector>(theta.data(), d), SymMatrix(J));
}

} // namespace splithmc
