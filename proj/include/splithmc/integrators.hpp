#pragma once

// Exact sub-flows (kick, drift, rotations) and the five Strang one-step maps:
//
//   kdk      half-kick(grad U)      drift               half-kick       M = I
//   ukrk     half-kick(grad U1)     rotate (H0, M = I)  half-kick       M = I
//   pverlet  half-kick(J^-1 grad U) drift               half-kick       M = J
//   pkrk     half-kick(J^-1 grad U1) rotate (unit freq) half-kick       M = J
//   prkr     half-rotate            kick(J^-1 grad U1)  half-rotate     M = J
//
// Preconditioned maps carry the velocity v = J^-1 p instead of p, and
// J^-1 grad U1 = J^-1 grad U - (theta - theta*).

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "linalg.hpp"
#include "precompute.hpp"
#include "split_potential.hpp"

namespace splithmc {

enum class IntegratorKind { kdk, uncond_krk, precond_verlet, precond_krk, precond_rkr };

inline constexpr std::array<IntegratorKind, 5> all_integrator_kinds{
    IntegratorKind::kdk, IntegratorKind::uncond_krk, IntegratorKind::precond_verlet, IntegratorKind::precond_krk,
    IntegratorKind::precond_rkr};

inline std::string_view short_name(IntegratorKind k) {
    switch (k) {
    case IntegratorKind::kdk: return "kdk";
    case IntegratorKind::uncond_krk: return "ukrk";
    case IntegratorKind::precond_verlet: return "pverlet";
    case IntegratorKind::precond_krk: return "pkrk";
    case IntegratorKind::precond_rkr: return "prkr";
    }
    return "?";
}

inline std::string_view display_name(IntegratorKind k) {
    switch (k) {
    case IntegratorKind::kdk: return "UncondVerlet";
    case IntegratorKind::uncond_krk: return "UncondKRK";
    case IntegratorKind::precond_verlet: return "PrecondVerlet";
    case IntegratorKind::precond_krk: return "PrecondKRK";
    case IntegratorKind::precond_rkr: return "PrecondRKR";
    }
    return "?";
}

inline IntegratorKind parse_integrator_kind(std::string_view s) {
    for (auto k : all_integrator_kinds)
        if (s == short_name(k) || s == display_name(k)) return k;
    throw std::invalid_argument("unknown integrator '" + std::string(s) + "' (expected kdk|ukrk|pverlet|pkrk|prkr)");
}

inline bool is_preconditioned(IntegratorKind k) {
    return k == IntegratorKind::precond_verlet || k == IntegratorKind::precond_krk || k == IntegratorKind::precond_rkr;
}

inline bool uses_rotation(IntegratorKind k) {
    return k == IntegratorKind::uncond_krk || k == IntegratorKind::precond_krk || k == IntegratorKind::precond_rkr;
}

enum class Convention { momentum, velocity };

inline Convention convention_of(IntegratorKind k) {
    return is_preconditioned(k) ? Convention::velocity : Convention::momentum;
}

struct PhaseState {
    Vector theta;
    Vector m;  // momentum p or velocity v, per convention
    Convention convention = Convention::momentum;

    bool finite() const { return theta.allFinite() && m.allFinite(); }
};

struct IntegratorSpec {
    IntegratorKind kind = IntegratorKind::kdk;
    double eps_bar = 0.1;
    int steps = 1;

    double duration() const { return eps_bar * steps; }

    void validate() const {
        if (!(eps_bar > 0.0) || steps < 1) {
            std::ostringstream msg;
            msg << "IntegratorSpec: need eps_bar > 0 and L >= 1 (got " << eps_bar << ", " << steps << ")";
            throw std::invalid_argument(msg.str());
        }
    }
};

inline PhaseState kick(PhaseState s, double eps, const Vector& grad) {
    s.m.noalias() -= eps * grad;
    return s;
}

inline PhaseState drift(PhaseState s, double eps) {
    s.theta.noalias() += eps * s.m;
    return s;
}

// Per-frequency cos/sin of eps * omega_j for the unconditioned rotation.
struct RotationTable {
    Vector omega, cos, sin;

    RotationTable(double eps, const Vector& frequencies)
        : omega(frequencies), cos((eps * frequencies).array().cos()), sin((eps * frequencies).array().sin()) {}
};

// Exact H0 flow for M = I, in eigen-coordinates u = Z(theta - theta*), w = Z p.
inline PhaseState rotate_uncond(PhaseState s, const RotationTable& table, const QuadraticReference& ref) {
    const Vector u = ref.eig.Z * (s.theta - ref.theta_star);
    const Vector w = ref.eig.Z * s.m;
    const Vector u2 = table.cos.cwiseProduct(u) + table.sin.cwiseProduct(w).cwiseQuotient(table.omega);
    const Vector w2 = table.cos.cwiseProduct(w) - table.omega.cwiseProduct(table.sin).cwiseProduct(u);
    s.theta.noalias() = ref.eig.Z.transpose() * u2;
    s.theta += ref.theta_star;
    s.m.noalias() = ref.eig.Z.transpose() * w2;
    return s;
}

inline PhaseState rotate_uncond(PhaseState s, double eps, const QuadraticReference& ref) {
    return rotate_uncond(std::move(s), RotationTable(eps, ref.omega), ref);
}

// Exact H0 flow for M = J in velocity variables: a plain rotation of
// (theta - theta*, v) with unit frequency.
inline PhaseState rotate_precond(PhaseState s, double c, double sn, const Vector& theta_star) {
    const Vector u = s.theta - theta_star;
    s.theta = c * u + sn * s.m + theta_star;
    s.m = c * s.m - sn * u;
    return s;
}

inline PhaseState rotate_precond(PhaseState s, double eps, const Vector& theta_star) {
    return rotate_precond(std::move(s), std::cos(eps), std::sin(eps), theta_star);
}

// The vector each kind's kick subtracts (scaled by the kick length).
template <Potential T>
Vector kick_direction(IntegratorKind kind, const SplitPotential<T>& split, const Vector& theta) {
    const QuadraticReference& ref = split.reference();
    switch (kind) {
    case IntegratorKind::kdk: return split.gradient(theta);
    case IntegratorKind::uncond_krk: return split.gradient_u1(theta);
    case IntegratorKind::precond_verlet: return chol_solve(ref.chol, split.gradient(theta));
    case IntegratorKind::precond_krk:
    case IntegratorKind::precond_rkr: return chol_solve(ref.chol, split.gradient(theta)) - (theta - ref.theta_star);
    }
    throw std::logic_error("kick_direction: unknown kind");
}

inline double kinetic_energy(const PhaseState& s, const QuadraticReference& ref) {
    if (s.convention == Convention::momentum) return 0.5 * s.m.squaredNorm();
    // 1/2 v^T J v = 1/2 |B^T v|^2
    return 0.5 * (ref.chol.B.transpose().triangularView<Eigen::Upper>() * s.m).squaredNorm();
}

template <Potential T>
double hamiltonian(const SplitPotential<T>& split, const PhaseState& s) {
    return split.u(s.theta) + kinetic_energy(s, split.reference());
}

namespace detail {

// Reuses the last kick direction when theta has not moved, so adjacent
// half-kicks across step boundaries cost one gradient evaluation. The result
// is bitwise identical to recomputing.
template <Potential T>
class KickCache {
public:
    KickCache(IntegratorKind kind, const SplitPotential<T>& split) : kind_(kind), split_(&split) {}

    const Vector& at(const Vector& theta) {
        if (!valid_ || theta.size() != theta_.size() || theta != theta_) {
            theta_ = theta;
            if (!theta.allFinite()) {
                // Diverged: poison the state instead of evaluating U there.
                direction_ = Vector::Constant(theta.size(), std::numeric_limits<double>::quiet_NaN());
                valid_ = false;
                return direction_;
            }
            direction_ = kick_direction(kind_, *split_, theta);
            valid_ = true;
            ++evals_;
        }
        return direction_;
    }

    std::size_t evals() const { return evals_; }

private:
    IntegratorKind kind_;
    const SplitPotential<T>* split_;
    Vector theta_, direction_;
    bool valid_ = false;
    std::size_t evals_ = 0;
};

inline void check_convention(IntegratorKind kind, const PhaseState& s) {
    if (s.convention != convention_of(kind))
        throw std::invalid_argument("integrator " + std::string(short_name(kind)) +
                                    ": phase state uses the wrong momentum/velocity convention");
}

// Precomputed per-trajectory rotation data.
struct RotationData {
    std::optional<RotationTable> table;  // ukrk
    double c = 1.0, s = 0.0;             // pkrk (eps) / prkr (eps/2)
};

template <Potential T>
RotationData rotation_data(IntegratorKind kind, double eps, const SplitPotential<T>& split) {
    RotationData r;
    if (kind == IntegratorKind::uncond_krk) r.table.emplace(eps, split.reference().omega);
    const double angle = kind == IntegratorKind::precond_rkr ? 0.5 * eps : eps;
    r.c = std::cos(angle);
    r.s = std::sin(angle);
    return r;
}

template <Potential T>
PhaseState advance(IntegratorKind kind, PhaseState s, double eps, const SplitPotential<T>& split,
                   const RotationData& rot, KickCache<T>& cache) {
    const QuadraticReference& ref = split.reference();
    switch (kind) {
    case IntegratorKind::kdk:
    case IntegratorKind::precond_verlet:
        s = kick(std::move(s), 0.5 * eps, cache.at(s.theta));
        s = drift(std::move(s), eps);
        return kick(std::move(s), 0.5 * eps, cache.at(s.theta));
    case IntegratorKind::uncond_krk:
        s = kick(std::move(s), 0.5 * eps, cache.at(s.theta));
        s = rotate_uncond(std::move(s), *rot.table, ref);
        return kick(std::move(s), 0.5 * eps, cache.at(s.theta));
    case IntegratorKind::precond_krk:
        s = kick(std::move(s), 0.5 * eps, cache.at(s.theta));
        s = rotate_precond(std::move(s), rot.c, rot.s, ref.theta_star);
        return kick(std::move(s), 0.5 * eps, cache.at(s.theta));
    case IntegratorKind::precond_rkr:
        s = rotate_precond(std::move(s), rot.c, rot.s, ref.theta_star);
        s = kick(std::move(s), eps, cache.at(s.theta));
        return rotate_precond(std::move(s), rot.c, rot.s, ref.theta_star);
    }
    throw std::logic_error("advance: unknown kind");
}

} // namespace detail

// One Strang step of the selected pattern; every kick evaluates its gradient.
template <Potential T>
PhaseState step(const IntegratorSpec& spec, const PhaseState& s, double eps, const SplitPotential<T>& split) {
    detail::check_convention(spec.kind, s);
    detail::KickCache<T> cache(spec.kind, split);
    const auto rot = detail::rotation_data(spec.kind, eps, split);
    return detail::advance(spec.kind, s, eps, split, rot, cache);
}

struct TrajectoryResult {
    PhaseState state;
    std::size_t grad_evals = 0;
    bool diverged = false;
};

// spec.steps Strang steps of length eps. Stops early and flags divergence as
// soon as a coordinate becomes non-finite.
template <Potential T>
TrajectoryResult trajectory(const IntegratorSpec& spec, PhaseState s, double eps, const SplitPotential<T>& split) {
    spec.validate();
    detail::check_convention(spec.kind, s);
    detail::KickCache<T> cache(spec.kind, split);
    const auto rot = detail::rotation_data(spec.kind, eps, split);
    TrajectoryResult out;
    for (int i = 0; i < spec.steps; ++i) {
        s = detail::advance(spec.kind, std::move(s), eps, split, rot, cache);
        if (!s.finite()) {
            out.diverged = true;
            break;
        }
    }
    out.state = std::move(s);
    out.grad_evals = cache.evals();
    return out;
}

} // namespace splithmc
