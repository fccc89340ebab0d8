#pragma once

// Closed-form analysis of splitting integrators on the scalar model problem
//
//   H(theta, p) = 1/2 (p^2 + omega0^2 theta^2) + 1/2 kappa theta^2,
//
// split as H0 = 1/2 (p^2 + omega0^2 theta^2) (rotation) plus U1 = 1/2 kappa
// theta^2 (kick). omega0 = 1 is the preconditioned model; omega0 = 1/sigma the
// unconditioned one. Every one-step map is a 2x2 propagator [[A, B], [C, D]].

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace splithmc::model {

struct Propagator2x2 {
    double A = 1.0, B = 0.0, C = 0.0, D = 1.0;
    double kappa = 0.0;
    double eps = 0.0;

    double det() const { return A * D - B * C; }

    Propagator2x2 operator*(const Propagator2x2& o) const {
        return {A * o.A + B * o.C, A * o.B + B * o.D, C * o.A + D * o.C, C * o.B + D * o.D, kappa, eps};
    }

    // Composition over L steps.
    Propagator2x2 power(int L) const {
        Propagator2x2 out{1.0, 0.0, 0.0, 1.0, kappa, eps * L};
        for (int i = 0; i < L; ++i) out = *this * out;
        out.eps = eps * L;
        return out;
    }

    std::array<double, 2> apply(double theta, double p) const { return {A * theta + B * p, C * theta + D * p}; }
};

inline Propagator2x2 rotation_matrix(double t, double omega0 = 1.0) {
    const double c = std::cos(omega0 * t), s = std::sin(omega0 * t);
    return {c, s / omega0, -omega0 * s, c};
}

inline Propagator2x2 kick_matrix(double t, double spring) { return {1.0, 0.0, -spring * t, 1.0}; }

inline Propagator2x2 drift_matrix(double t) { return {1.0, t, 0.0, 1.0}; }

// Exact flow of the full model Hamiltonian.
inline Propagator2x2 exact_propagator(double eps, double kappa, double omega0 = 1.0) {
    auto p = rotation_matrix(eps, std::sqrt(omega0 * omega0 + kappa));
    p.kappa = kappa;
    p.eps = eps;
    return p;
}

enum class Scheme { krk, rkr, kdk };

inline std::string scheme_name(Scheme s) {
    switch (s) {
    case Scheme::krk: return "KRK";
    case Scheme::rkr: return "RKR";
    case Scheme::kdk: return "KDK";
    }
    return "?";
}

enum class SubFlow { rotation, kick };

// psi = phi^{H1}_{a1 eps} o phi^{H2}_{b1 eps} o ... o phi^{H1}_{am eps};
// h1 names which sub-flow the a coefficients drive.
struct PalindromicScheme {
    std::vector<double> a;
    std::vector<double> b;
    SubFlow h1 = SubFlow::rotation;

    static PalindromicScheme strang(SubFlow h1) { return {{0.5, 0.5}, {1.0}, h1}; }

    void validate(double tol = 1e-12) const {
        const std::size_t m = a.size();
        if (m < 2 || b.size() != m - 1) throw std::invalid_argument("PalindromicScheme: need m >= 2 a's and m-1 b's");
        double sa = 0.0, sb = 0.0;
        for (double x : a) sa += x;
        for (double x : b) sb += x;
        if (std::abs(sa - 1.0) > tol || std::abs(sb - 1.0) > tol)
            throw std::invalid_argument("PalindromicScheme: coefficients must each sum to 1");
        for (std::size_t i = 0; i < m; ++i)
            if (std::abs(a[i] - a[m - 1 - i]) > tol) throw std::invalid_argument("PalindromicScheme: a not palindromic");
        for (std::size_t i = 0; i + 1 < m; ++i)
            if (std::abs(b[i] - b[m - 2 - i]) > tol) throw std::invalid_argument("PalindromicScheme: b not palindromic");
    }
};

inline Propagator2x2 component_propagator(const PalindromicScheme& s, double eps, double omega0, double kappa) {
    s.validate();
    auto flow = [&](SubFlow f, double t) { return f == SubFlow::rotation ? rotation_matrix(t, omega0) : kick_matrix(t, kappa); };
    const SubFlow h2 = s.h1 == SubFlow::rotation ? SubFlow::kick : SubFlow::rotation;
    Propagator2x2 m = flow(s.h1, s.a[0] * eps);
    for (std::size_t i = 0; i < s.b.size(); ++i) m = m * flow(h2, s.b[i] * eps) * flow(s.h1, s.a[i + 1] * eps);
    m.kappa = kappa;
    m.eps = eps;
    return m;
}

inline Propagator2x2 component_propagator(Scheme s, double eps, double omega0, double kappa) {
    Propagator2x2 m;
    switch (s) {
    case Scheme::krk: m = kick_matrix(eps / 2, kappa) * rotation_matrix(eps, omega0) * kick_matrix(eps / 2, kappa); break;
    case Scheme::rkr: m = rotation_matrix(eps / 2, omega0) * kick_matrix(eps, kappa) * rotation_matrix(eps / 2, omega0); break;
    case Scheme::kdk: {
        const double spring = omega0 * omega0 + kappa;
        m = kick_matrix(eps / 2, spring) * drift_matrix(eps) * kick_matrix(eps / 2, spring);
        break;
    }
    }
    m.kappa = kappa;
    m.eps = eps;
    return m;
}

inline Propagator2x2 propagator(Scheme s, double eps, double kappa) {
    if (!(eps > 0.0) || !(kappa > -1.0)) throw std::invalid_argument("propagator: need eps > 0 and kappa > -1");
    return component_propagator(s, eps, 1.0, kappa);
}

inline Propagator2x2 propagator(const PalindromicScheme& s, double eps, double kappa) {
    if (!(eps > 0.0) || !(kappa > -1.0)) throw std::invalid_argument("propagator: need eps > 0 and kappa > -1");
    return component_propagator(s, eps, 1.0, kappa);
}

enum class Stability { stable, unstable, weakly_unstable, boundary_identity };

inline std::string stability_name(Stability s) {
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::weakly_unstable: return "weakly_unstable";
    case Stability::boundary_identity: return "boundary_identity";
    }
    return "?";
}

struct StabilityVerdict {
    Stability cls = Stability::unstable;
    double eta = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> chi;  // empty when sin(eta) = 0 or unstable

    bool stable() const { return cls == Stability::stable || cls == Stability::boundary_identity; }
};

// Three cases on |A| (A = trace / 2 for reversible symplectic maps); the
// |A| = 1 case splits into M = +-I (stable) and weak instability.
inline StabilityVerdict classify(const Propagator2x2& P, double tol = 1e-12) {
    StabilityVerdict v;
    const double a = std::abs(P.A);
    if (std::abs(a - 1.0) <= tol) {
        if (std::abs(P.B) + std::abs(P.C) <= tol) {
            v.cls = Stability::boundary_identity;
            v.eta = P.A > 0 ? 0.0 : std::numbers::pi;
        } else {
            v.cls = Stability::weakly_unstable;
        }
        return v;
    }
    if (a > 1.0) {
        v.cls = Stability::unstable;
        return v;
    }
    v.cls = Stability::stable;
    v.eta = std::acos(P.A);
    v.chi = P.B / std::sin(v.eta);
    return v;
}

namespace detail {

template <class F>
double bisect_stability(F&& stable_at, double lo, double hi) {
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (stable_at(mid) ? lo : hi) = mid;
    }
    return lo;
}

template <class F>
double scan_then_bisect(F&& stable_at, double eps_max, double h) {
    double prev = h;
    if (!stable_at(prev)) return detail::bisect_stability(stable_at, 0.0, prev);
    for (double e = 2 * h; e <= eps_max; e += h) {
        if (!stable_at(e)) return detail::bisect_stability(stable_at, prev, e);
        prev = e;
    }
    return std::numeric_limits<double>::infinity();
}

} // namespace detail

// First eps > 0 at which the model integration stops being strictly stable
// (|A| < 1); +inf when no loss of stability occurs below the scan limit.
inline double stability_limit(Scheme s, double kappa, double omega0 = 1.0) {
    if (!(kappa > -omega0 * omega0)) throw std::invalid_argument("stability_limit: need kappa > -omega0^2");
    auto stable_at = [&](double e) { return std::abs(component_propagator(s, e, omega0, kappa).A) < 1.0; };
    if (s == Scheme::kdk) return detail::scan_then_bisect(stable_at, 64.0 / omega0, 1e-3 / omega0);
    if (kappa == 0.0) return std::numeric_limits<double>::infinity();  // exact rotation
    const double half_period = std::numbers::pi / omega0;
    if (kappa < 0.0) return half_period;
    // Single crossing of A = -1 inside (0, pi/omega0), i.e. eps kappa = 2 omega0 cot(omega0 eps / 2).
    return detail::bisect_stability(stable_at, 1e-8 * half_period, half_period * (1.0 - 1e-12));
}

inline double stability_limit(const PalindromicScheme& s, double kappa, double eps_max = 64.0) {
    if (!(kappa > -1.0)) throw std::invalid_argument("stability_limit: need kappa > -1");
    auto stable_at = [&](double e) { return std::abs(component_propagator(s, e, 1.0, kappa).A) < 1.0; };
    return detail::scan_then_bisect(stable_at, eps_max, 1e-3);
}

// Energy error H(theta_L, p_L) - H(theta_0, p_0) for a reversible symplectic
// L-step propagator [[A, B], [C, A]].
inline double energy_error(double A, double B, double C, double kappa, double theta0, double p0) {
    return 0.5 * (C + (1.0 + kappa) * B) * (C * theta0 * theta0 + 2.0 * A * theta0 * p0 + B * p0 * p0);
}

inline double energy_error(const Propagator2x2& PL, double theta0, double p0) {
    return energy_error(PL.A, PL.B, PL.C, PL.kappa, theta0, p0);
}

namespace detail {

// x - sin x and sin x - x cos x, by their Taylor series below |x| = 1.
inline double x_minus_sin(double x) {
    if (std::abs(x) >= 1.0) return x - std::sin(x);
    const double x2 = x * x;
    double term = x * x2 / 6.0, sum = 0.0;
    for (int k = 1; k < 12; ++k) {
        sum += term;
        term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return sum;
}

inline double sin_minus_x_cos(double x) {
    if (std::abs(x) >= 1.0) return std::sin(x) - x * std::cos(x);
    // sum_k (-1)^(k+1) 2k x^(2k+1) / (2k+1)!
    const double x2 = x * x;
    double power = x * x2 / 6.0, sum = 0.0;  // x^(2k+1) / (2k+1)!
    for (int k = 1; k < 12; ++k) {
        sum += (k % 2 ? 1.0 : -1.0) * 2.0 * k * power;
        power *= x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return sum;
}

} // namespace detail

// C + (1+kappa) B of the one-step propagator, in forms free of cancellation.
inline double energy_factor(Scheme s, double eps, double kappa) {
    switch (s) {
    case Scheme::krk: {
        const double sn = std::sin(eps);
        return kappa * detail::sin_minus_x_cos(eps) + 0.25 * kappa * kappa * eps * eps * sn;
    }
    case Scheme::rkr: {
        const double h = std::sin(0.5 * eps);
        return -kappa * (detail::x_minus_sin(eps) + eps * kappa * h * h);
    }
    case Scheme::kdk: {
        const double w2 = 1.0 + kappa;
        return 0.25 * eps * eps * eps * w2 * w2;
    }
    }
    throw std::logic_error("energy_factor: unknown scheme");
}

// One step of a named scheme, with the first factor of the Lemma taken from
// energy_factor.
inline double energy_error(Scheme s, double eps, double kappa, double theta0, double p0) {
    const auto P = propagator(s, eps, kappa);
    return 0.5 * energy_factor(s, eps, kappa) * (P.C * theta0 * theta0 + 2.0 * P.A * theta0 * p0 + P.B * p0 * p0);
}

class UnstableError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// rho = (C + (1+kappa) B)^2 / (2 (1+kappa) (1 - A^2)); defined for |A| < 1.
inline double rho(const Propagator2x2& P) {
    if (!(std::abs(P.A) < 1.0)) {
        std::ostringstream msg;
        msg << "rho: propagator not strictly stable (A = " << P.A << ", eps = " << P.eps << ", kappa = " << P.kappa << ")";
        throw UnstableError(msg.str());
    }
    const double k1 = 1.0 + P.kappa;
    const double num = P.C + k1 * P.B;
    return num * num / (2.0 * k1 * (1.0 - P.A * P.A));
}

inline double rho(Scheme s, double eps, double kappa) { return rho(propagator(s, eps, kappa)); }

inline double rho_krk_closed_form(double e, double k) {
    const double c = std::cos(e), s = std::sin(e);
    const double num = -4.0 * e * c + (4.0 + k * e * e) * s;
    return k * k / s * num * num / (8.0 * (1.0 + k) * (4.0 * k * e * c + (4.0 - k * k * e * e) * s));
}

inline double rho_rkr_closed_form(double e, double k) {
    const double c = std::cos(e), s = std::sin(e);
    const double num = k * e * c + 2.0 * s - (2.0 + k) * e;
    return k * k / s * num * num / (2.0 * (1.0 + k) * (4.0 * k * e * c + (4.0 - k * k * e * e) * s));
}

// E[Delta] = sin^2(L eta) rho at stationarity.
inline double expected_energy_error(const Propagator2x2& P, int L) {
    const auto v = classify(P);
    if (v.cls == Stability::boundary_identity) return 0.0;
    if (v.cls != Stability::stable) {
        std::ostringstream msg;
        msg << "expected_energy_error: integration is " << stability_name(v.cls);
        throw UnstableError(msg.str());
    }
    const double s = std::sin(L * v.eta);
    return s * s * rho(P);
}

inline double expected_energy_error(Scheme s, double eps, double kappa, int L) {
    return expected_energy_error(propagator(s, eps, kappa), L);
}

struct ComponentVerdict {
    double sigma = 0.0;
    double omega = 0.0;  // sqrt(sigma^-2 + kappa), or sqrt(1 + kappa sigma^2) preconditioned
    StabilityVerdict verdict;
};

struct CounterexampleReport {
    std::array<ComponentVerdict, 2> components;
    double min_steps = 0.0;  // C / (eps omega_2)
    bool decorrelates = false;
    double stability_onset = 0.0;  // first eps > 0 at which some component loses stability

    bool stable() const { return components[0].verdict.stable() && components[1].verdict.stable(); }
};

// Two uncoupled oscillators with standard deviations sigma1 <= sigma2 and
// perturbation U1 = kappa/2 |theta|^2. With preconditioning (M = diag(sigma^-2))
// each component becomes a unit-frequency rotation with kick strength
// kappa sigma_i^2.
inline CounterexampleReport counterexample_2d(double eps, int L, double sigma1, double sigma2, double kappa, Scheme scheme,
                                              bool preconditioned = false, double C = std::numbers::pi / 2) {
    if (!(sigma1 > 0.0 && sigma1 <= sigma2)) throw std::invalid_argument("counterexample_2d: need 0 < sigma1 <= sigma2");
    CounterexampleReport r;
    const std::array<double, 2> sig{sigma1, sigma2};
    r.stability_onset = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2; ++i) {
        const double s = sig[static_cast<std::size_t>(i)];
        const double omega0 = preconditioned ? 1.0 : 1.0 / s;
        const double k = preconditioned ? kappa * s * s : kappa;
        auto& c = r.components[static_cast<std::size_t>(i)];
        c.sigma = s;
        c.omega = std::sqrt(omega0 * omega0 + k);
        c.verdict = classify(component_propagator(scheme, eps, omega0, k));
        r.stability_onset = std::min(r.stability_onset, stability_limit(scheme, k, omega0));
    }
    r.min_steps = C / (eps * r.components[1].omega);
    r.decorrelates = L >= r.min_steps;
    return r;
}

// CSV grid over (eps, kappa) of rho for KRK and RKR plus the stability flag.
inline void write_rho_grid(std::ostream& os, double eps_lo, double eps_hi, int n_eps, double kappa_lo, double kappa_hi,
                           int n_kappa) {
    os << "eps,kappa,rho_krk,rho_rkr,stable\n" << std::setprecision(12);
    for (int i = 0; i < n_kappa; ++i) {
        const double k = n_kappa == 1 ? kappa_lo : kappa_lo + (kappa_hi - kappa_lo) * i / (n_kappa - 1);
        for (int j = 0; j < n_eps; ++j) {
            const double e = n_eps == 1 ? eps_lo : eps_lo + (eps_hi - eps_lo) * j / (n_eps - 1);
            const auto pk = propagator(Scheme::krk, e, k);
            const bool stable = std::abs(pk.A) < 1.0;
            os << e << ',' << k << ',';
            if (stable) os << rho(pk) << ',' << rho(propagator(Scheme::rkr, e, k));
            else os << "nan,nan";
            os << ',' << (stable ? 1 : 0) << '\n';
        }
    }
}

// Stability boundary eps*(kappa) for KRK/RKR and KDK as CSV rows.
inline void write_stability_boundary(std::ostream& os, double kappa_lo, double kappa_hi, int n_kappa) {
    os << "kappa,eps_star_krk_rkr,eps_star_kdk\n" << std::setprecision(15);
    for (int i = 0; i < n_kappa; ++i) {
        const double k = n_kappa == 1 ? kappa_lo : kappa_lo + (kappa_hi - kappa_lo) * i / (n_kappa - 1);
        os << k << ',' << stability_limit(Scheme::krk, k) << ',' << stability_limit(Scheme::kdk, k) << '\n';
    }
}

} // namespace splithmc::model
