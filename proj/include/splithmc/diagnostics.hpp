#pragma once

// Observables, integrated autocorrelation times and run reports.

#include <algorithm>
#include <complex>
#include <iomanip>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include "integrators.hpp"
#include "sampler.hpp"

namespace splithmc {

struct ObservableSeries {
    std::string name;  // "loglik", "theta_sq" or "component_<j>"
    std::vector<double> values;
};

class IacError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Normalized autocorrelation rho(t), t = 0..n-1, by zero-padded FFT of length
// the next power of two >= 2n.
inline std::vector<double> autocorrelation(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) throw IacError("autocorrelation: need at least two values");
    std::size_t len = 1;
    while (len < 2 * n) len <<= 1;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    std::vector<std::complex<double>> buf(len, {0.0, 0.0}), freq;
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i] - mean;
    Eigen::FFT<double> fft;
    fft.fwd(freq, buf);
    for (auto& f : freq) f = std::norm(f);
    fft.inv(buf, freq);

    const double c0 = buf[0].real();
    if (!(c0 > 0.0)) throw IacError("autocorrelation: series is constant (stuck chain?)");
    std::vector<double> acf(n);
    for (std::size_t t = 0; t < n; ++t) acf[t] = buf[t].real() / c0;
    return acf;
}

struct IacResult {
    double tau = 0.0;
    std::size_t window = 0;
};

// tau = 1 + 2 sum_{t=1}^{M} rho(t), with M the smallest window satisfying
// M >= c * tau(M) (Sokal's automatic windowing).
inline IacResult integrated_time(const std::vector<double>& x, double c = 5.0) {
    if (x.size() < 50) throw IacError("integrated_time: need at least 50 samples");
    const auto acf = autocorrelation(x);
    double tau = 1.0;
    for (std::size_t m = 1; m < acf.size(); ++m) {
        tau += 2.0 * acf[m];
        if (static_cast<double>(m) >= c * tau) return {tau, m};
    }
    return {tau, acf.size() - 1};
}

inline double iac(const ObservableSeries& s, double c = 5.0) { return integrated_time(s.values, c).tau; }

template <class T>
std::vector<ObservableSeries> observables(const ChainOutput& chain, const T& target) {
    const Index n = chain.samples.rows(), d = chain.samples.cols();
    if (n == 0) throw std::invalid_argument("observables: empty chain");
    std::vector<ObservableSeries> out;
    out.push_back({"loglik", std::vector<double>(static_cast<std::size_t>(n))});
    out.push_back({"theta_sq", std::vector<double>(static_cast<std::size_t>(n))});
    for (Index k = 0; k < n; ++k) {
        const Vector th = chain.samples.row(k).transpose();
        out[0].values[static_cast<std::size_t>(k)] = target.log_likelihood(th);
        out[1].values[static_cast<std::size_t>(k)] = th.squaredNorm();
    }
    for (Index j = 0; j < d; ++j) {
        ObservableSeries s{"component_" + std::to_string(j), std::vector<double>(static_cast<std::size_t>(n))};
        for (Index k = 0; k < n; ++k) s.values[static_cast<std::size_t>(k)] = chain.samples(k, j);
        out.push_back(std::move(s));
    }
    return out;
}

struct RunReport {
    std::string method;
    std::string label;  // free-form run label, e.g. "A" / "B"
    int steps = 0;
    double eps_bar = 0.0;
    double duration = 0.0;
    std::size_t n_samples = 0;
    double acceptance = 0.0;
    double mean_accept_prob = 0.0;
    std::size_t divergences = 0;
    double tau_loglik = 0.0;
    double tau_theta_sq = 0.0;
    double tau_max = 0.0;
    Index tau_max_component = 0;
    double grad_evals_per_sample = 0.0;
    std::optional<double> wall_ms_per_sample;
    bool tau_below_one = false;

    double cost_loglik() const { return tau_loglik * grad_evals_per_sample; }
    double cost_theta_sq() const { return tau_theta_sq * grad_evals_per_sample; }
    double cost_max() const { return tau_max * grad_evals_per_sample; }
};

struct RunMeta {
    IntegratorKind kind;
    int steps;
    double eps_bar;
    double duration;
    std::string label;
};

// Components only enter tau_max; loglik and theta^T theta are reported
// separately.
template <class T>
RunReport report(const ChainOutput& chain, const T& target, const RunMeta& meta, double c = 5.0) {
    const auto series = observables(chain, target);
    RunReport r;
    r.method = std::string(display_name(meta.kind));
    r.label = meta.label;
    r.steps = meta.steps;
    r.eps_bar = meta.eps_bar;
    r.duration = meta.duration;
    r.n_samples = chain.size();
    r.acceptance = chain.acceptance_rate();
    r.mean_accept_prob = chain.mean_accept_prob();
    r.divergences = chain.divergences;
    r.tau_loglik = iac(series[0], c);
    r.tau_theta_sq = iac(series[1], c);
    for (std::size_t j = 2; j < series.size(); ++j) {
        const double t = iac(series[j], c);
        if (t > r.tau_max || j == 2) {
            r.tau_max = t;
            r.tau_max_component = static_cast<Index>(j - 2);
        }
        r.tau_below_one = r.tau_below_one || t < 1.0;
    }
    r.tau_below_one = r.tau_below_one || r.tau_loglik < 1.0 || r.tau_theta_sq < 1.0;
    r.grad_evals_per_sample = static_cast<double>(chain.grad_evals) / static_cast<double>(chain.size());
    r.wall_ms_per_sample = 1e3 * chain.wall_seconds / static_cast<double>(chain.size());
    return r;
}

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["label"] = r.label;
    j["L"] = r.steps;
    j["eps_bar"] = r.eps_bar;
    j["T"] = r.duration;
    j["n_samples"] = r.n_samples;
    j["acceptance"] = r.acceptance;
    j["mean_accept_prob"] = r.mean_accept_prob;
    j["divergences"] = r.divergences;
    j["tau_loglik"] = r.tau_loglik;
    j["tau_theta_sq"] = r.tau_theta_sq;
    j["tau_max"] = r.tau_max;
    j["tau_max_component"] = r.tau_max_component;
    j["tau_below_one"] = r.tau_below_one;
    j["grad_evals_per_sample"] = r.grad_evals_per_sample;
    j["cost_grad"] = {{"loglik", r.cost_loglik()}, {"theta_sq", r.cost_theta_sq()}, {"max", r.cost_max()}};
    if (r.wall_ms_per_sample) {
        const double s = *r.wall_ms_per_sample;
        j["wall_ms_per_sample"] = s;
        j["cost_ms"] = {{"loglik", r.tau_loglik * s}, {"theta_sq", r.tau_theta_sq * s}, {"max", r.tau_max * s}};
    } else {
        j["wall_ms_per_sample"] = nullptr;
        j["cost_ms"] = nullptr;
    }
    return j;
}

inline std::string table_header() {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-16s %4s %8s %7s %8s %18s %18s %18s %5s", "method", "L", "eps_bar", "grad/s",
                  "s[ms]", "tau_l x grad", "tau_th2 x grad", "tau_max x grad", "AP");
    return buf;
}

// One row in the column order of the benchmark tables, with gradient
// evaluations per sample as the cost unit.
inline std::string table_row(const RunReport& r) {
    const std::string name = r.label.empty() ? r.method : r.method + " " + r.label;
    char ms[32];
    if (r.wall_ms_per_sample) std::snprintf(ms, sizeof ms, "%.3f", *r.wall_ms_per_sample);
    else std::snprintf(ms, sizeof ms, "-");
    char cols[3][48];
    std::snprintf(cols[0], sizeof cols[0], "%.1f x g=%.1f", r.tau_loglik, r.cost_loglik());
    std::snprintf(cols[1], sizeof cols[1], "%.1f x g=%.1f", r.tau_theta_sq, r.cost_theta_sq());
    std::snprintf(cols[2], sizeof cols[2], "%.1f x g=%.1f", r.tau_max, r.cost_max());
    char buf[320];
    std::snprintf(buf, sizeof buf, "%-16s %4d %8.4f %7.1f %8s %18s %18s %18s %5.2f", name.c_str(), r.steps, r.eps_bar,
                  r.grad_evals_per_sample, ms, cols[0], cols[1], cols[2], r.acceptance);
    return buf;
}

// lag,rho rows up to max_lag.
inline void write_acf_csv(std::ostream& os, const std::vector<double>& acf, std::size_t max_lag) {
    os << "lag,rho\n" << std::setprecision(17);
    for (std::size_t t = 0; t <= std::min(max_lag, acf.size() - 1); ++t) os << t << ',' << acf[t] << '\n';
}

} // namespace splithmc
