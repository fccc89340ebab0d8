#pragma once

// Posterior targets: Bayesian logistic regression with an isotropic Gaussian
// prior, an exact Gaussian target used for exactness checks, the simulated
// data generator, the Fisher-information estimator and dataset ingestion.

#include <charconv>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "linalg.hpp"
#include "rng.hpp"

namespace splithmc {

// Anything with a potential U, its gradient and Hessian over R^d.
template <class T>
concept Potential = requires(const T& t, const Vector& x) {
    { t.dim() } -> std::convertible_to<Index>;
    { t.value(x) } -> std::convertible_to<double>;
    { t.gradient(x) } -> std::convertible_to<Vector>;
    { t.hessian(x) } -> std::same_as<SymMatrix>;
};

template <class T>
concept HasLogLikelihood = Potential<T> && requires(const T& t, const Vector& x) {
    { t.log_likelihood(x) } -> std::convertible_to<double>;
};

template <Potential T>
double potential(const T& t, const Vector& theta) {
    return t.value(theta);
}

// U(to) - U(from), using the target's cancellation-free form when it has one.
template <Potential T>
double potential_difference(const T& t, const Vector& from, const Vector& to) {
    if constexpr (requires { { t.value_difference(from, to) } -> std::convertible_to<double>; })
        return t.value_difference(from, to);
    else
        return t.value(to) - t.value(from);
}

template <Potential T>
Vector gradient(const T& t, const Vector& theta) {
    return t.gradient(theta);
}

template <Potential T>
SymMatrix hessian(const T& t, const Vector& theta) {
    return t.hessian(theta);
}

// log(1 + e^z) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline void require_finite(const Vector& theta, const char* what) {
    if (!theta.allFinite()) throw std::domain_error(std::string(what) + ": non-finite parameter vector");
}

struct Dataset {
    Matrix X;  // n x (d-1) raw, or n x d with a leading ones column once augmented
    Vector y;  // labels in {0, 1}
    bool augmented = false;

    Index size() const { return X.rows(); }
    Index features() const { return augmented ? X.cols() - 1 : X.cols(); }

    // Prepends the intercept column x~ = [1, x^T]^T.
    Dataset& augment() {
        if (augmented) return *this;
        Matrix a(X.rows(), X.cols() + 1);
        a.col(0).setOnes();
        a.rightCols(X.cols()) = X;
        X = std::move(a);
        augmented = true;
        return *this;
    }

    // First n rows; used for nested simulated designs.
    Dataset head(Index n) const {
        if (n < 1 || n > size()) throw std::out_of_range("Dataset::head: row count out of range");
        return Dataset{X.topRows(n), y.head(n), augmented};
    }

    void validate() const {
        if (X.rows() != y.size()) throw DimensionError("Dataset: label count does not match row count");
        for (Index i = 0; i < y.size(); ++i)
            if (y(i) != 0.0 && y(i) != 1.0) {
                std::ostringstream msg;
                msg << "Dataset: label " << y(i) << " at row " << i << " is not binary";
                throw std::invalid_argument(msg.str());
            }
        if (augmented && !(X.col(0).array() == 1.0).all())
            throw std::invalid_argument("Dataset: intercept column is not all ones");
    }
};

// U(theta) = sum_i [softplus(z_i) - y_i z_i] + theta^T theta / (2 s2),
// z_i = theta^T x~_i, s2 the prior variance.
class LogisticPosterior {
public:
    LogisticPosterior(Dataset data, double prior_variance)
        : data_(std::move(data)), prior_variance_(prior_variance) {
        if (!(prior_variance_ > 0.0)) throw std::invalid_argument("LogisticPosterior: prior variance must be positive");
        data_.augment();
        data_.validate();
    }

    Index dim() const { return data_.X.cols(); }
    const Dataset& data() const { return data_; }
    double prior_variance() const { return prior_variance_; }

    // Log-likelihood only (no prior).
    double log_likelihood(const Vector& theta) const {
        require_finite(theta, "log_likelihood");
        const Vector z = data_.X * theta;
        double nll = 0.0;
        for (Index i = 0; i < z.size(); ++i) nll += softplus(z(i)) - data_.y(i) * z(i);
        return -nll;
    }

    double value(const Vector& theta) const {
        return -log_likelihood(theta) + theta.squaredNorm() / (2.0 * prior_variance_);
    }

    // U(to) - U(from) term by term:
    // softplus(b) - softplus(a) = log1p(sigmoid(a) expm1(b - a)).
    double value_difference(const Vector& from, const Vector& to) const {
        require_finite(from, "value_difference");
        require_finite(to, "value_difference");
        const Vector za = data_.X * from, dz = data_.X * (to - from);
        double acc = 0.0;
        for (Index i = 0; i < za.size(); ++i) acc += std::log1p(sigmoid(za(i)) * std::expm1(dz(i))) - data_.y(i) * dz(i);
        return acc + (to - from).dot(to + from) / (2.0 * prior_variance_);
    }

    Vector gradient(const Vector& theta) const {
        require_finite(theta, "gradient");
        Vector r = data_.X * theta;
        for (Index i = 0; i < r.size(); ++i) r(i) = sigmoid(r(i)) - data_.y(i);
        Vector g = data_.X.transpose() * r;
        g += theta / prior_variance_;
        return g;
    }

    SymMatrix hessian(const Vector& theta) const {
        require_finite(theta, "hessian");
        Vector w = data_.X * theta;
        for (Index i = 0; i < w.size(); ++i) {
            const double s = sigmoid(w(i));
            w(i) = s * (1.0 - s);
        }
        Matrix h = data_.X.transpose() * w.asDiagonal() * data_.X;
        h.diagonal().array() += 1.0 / prior_variance_;
        return SymMatrix(h);
    }

private:
    Dataset data_;
    double prior_variance_;
};

// U(theta) = 1/2 (theta - mean)^T P (theta - mean).
class GaussianTarget {
public:
    GaussianTarget(Vector mean, const SymMatrix& precision) : mean_(std::move(mean)), precision_(precision) {
        require_same_size(precision_.size(), mean_.size(), "GaussianTarget");
    }

    Index dim() const { return mean_.size(); }
    const Vector& mean() const { return mean_; }
    const SymMatrix& precision() const { return precision_; }

    double value(const Vector& theta) const {
        const Vector u = theta - mean_;
        return 0.5 * u.dot(precision_.matrix() * u);
    }
    double value_difference(const Vector& from, const Vector& to) const {
        return 0.5 * (to - from).dot(precision_.matrix() * (to + from - 2.0 * mean_));
    }
    double log_likelihood(const Vector& theta) const { return -value(theta); }
    Vector gradient(const Vector& theta) const { return precision_.matrix() * (theta - mean_); }
    SymMatrix hessian(const Vector&) const { return precision_; }

private:
    Vector mean_;
    SymMatrix precision_;
};

// Per-feature design variances: 25 for j <= 5, 1 for 5 < j <= 10, 0.04 beyond
// (j is 1-based over the d-1 non-intercept features).
inline Vector simdata_feature_variances(Index d_minus_1) {
    Vector s2(d_minus_1);
    for (Index j = 1; j <= d_minus_1; ++j) s2(j - 1) = j <= 5 ? 25.0 : (j <= 10 ? 1.0 : 0.04);
    return s2;
}

struct SimData {
    Dataset data;
    Vector true_theta;
};

// Draw order: true parameters first, then (x_i, y_i) row by row, so the first
// m rows of an n-row draw equal an m-row draw from the same stream state.
inline SimData generate_simdata(RngStream& stream, Index n, Index d_minus_1, double gamma2 = 1.0) {
    if (n < 1 || d_minus_1 < 1) throw std::invalid_argument("generate_simdata: need n >= 1 and d-1 >= 1");
    if (!(gamma2 > 0.0)) throw std::invalid_argument("generate_simdata: gamma^2 must be positive");
    const Vector sd = simdata_feature_variances(d_minus_1).cwiseSqrt();
    SimData out;
    out.true_theta = std::sqrt(gamma2) * stream.normal(d_minus_1 + 1);
    out.data.X.resize(n, d_minus_1 + 1);
    out.data.y.resize(n);
    out.data.augmented = true;
    for (Index i = 0; i < n; ++i) {
        out.data.X(i, 0) = 1.0;
        for (Index j = 0; j < d_minus_1; ++j) out.data.X(i, j + 1) = sd(j) * stream.normal();
        const double z = out.data.X.row(i).dot(out.true_theta);
        out.data.y(i) = stream.bernoulli(sigmoid(z)) ? 1.0 : 0.0;
    }
    return out;
}

// Monte Carlo estimate of the per-datum Fisher information
// E[s(1-s) x~ x~^T], s = sigmoid(theta^T x~), with x ~ N(0, diag(feature_variances)).
inline SymMatrix fisher_info_mc(const Vector& true_theta, RngStream& stream, Index n_mc,
                                const Vector& feature_variances) {
    if (n_mc < 1) throw std::invalid_argument("fisher_info_mc: n_mc must be >= 1");
    require_same_size(feature_variances.size() + 1, true_theta.size(), "fisher_info_mc");
    const Index d = true_theta.size();
    const Vector sd = feature_variances.cwiseSqrt();
    constexpr Index batch = 4096;
    Matrix acc = Matrix::Zero(d, d);
    Matrix xb(batch, d);
    Vector w(batch);
    for (Index start = 0; start < n_mc; start += batch) {
        const Index m = std::min(batch, n_mc - start);
        for (Index i = 0; i < m; ++i) {
            xb(i, 0) = 1.0;
            for (Index j = 1; j < d; ++j) xb(i, j) = sd(j - 1) * stream.normal();
            const double s = sigmoid(xb.row(i).dot(true_theta));
            w(i) = std::sqrt(s * (1.0 - s));
        }
        const Matrix wx = w.head(m).asDiagonal() * xb.topRows(m);
        acc.selfadjointView<Eigen::Lower>().rankUpdate(wx.transpose());
    }
    Matrix full = acc.selfadjointView<Eigen::Lower>();
    return SymMatrix(full / static_cast<double>(n_mc));
}

// Reference shapes (rows, non-intercept features) of the real benchmark sets.
struct DatasetShape {
    Index n;
    Index d_minus_1;
};

inline std::optional<DatasetShape> known_dataset_shape(std::string_view name) {
    if (name == "statlog") return DatasetShape{4435, 36};
    if (name == "ctg") return DatasetShape{2126, 21};
    if (name == "chess") return DatasetShape{3196, 36};
    return std::nullopt;
}

class DatasetParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CsvOptions {
    char delimiter = ',';
    // Label column index; negative counts from the end.
    int label_column = -1;
    // Maps raw label text to {0,1}. Empty: labels must parse as 0 or 1.
    std::map<std::string, int> class_map;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

} // namespace detail

// CSV: one row per datum, d-1 numeric features and one label column. A header
// row is detected when any field of the first row is non-numeric.
inline Dataset parse_dataset_csv(std::istream& in, const CsvOptions& opts = {}) {
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    std::size_t width = 0;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line, opts.delimiter);
        if (fields.size() < 2) {
            std::ostringstream msg;
            msg << "line " << lineno << ": expected at least one feature and a label";
            throw DatasetParseError(msg.str());
        }
        const int ncol = static_cast<int>(fields.size());
        const int lab = opts.label_column < 0 ? ncol + opts.label_column : opts.label_column;
        if (lab < 0 || lab >= ncol) {
            std::ostringstream msg;
            msg << "line " << lineno << ": label column " << opts.label_column << " out of range";
            throw DatasetParseError(msg.str());
        }
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        bool numeric = true;
        for (int c = 0; c < ncol && numeric; ++c) {
            if (c == lab) continue;
            if (auto v = detail::parse_double(fields[static_cast<std::size_t>(c)])) row.push_back(*v);
            else numeric = false;
        }
        if (!numeric) {
            if (rows.empty() && lineno == 1) continue;  // header
            std::ostringstream msg;
            msg << "line " << lineno << ": non-numeric feature field";
            throw DatasetParseError(msg.str());
        }
        const std::string label_text(fields[static_cast<std::size_t>(lab)]);
        double label = 0.0;
        if (!opts.class_map.empty()) {
            const auto it = opts.class_map.find(label_text);
            if (it == opts.class_map.end() && lineno == 1 && rows.empty()) continue;  // header
            if (it == opts.class_map.end()) {
                std::ostringstream msg;
                msg << "line " << lineno << ": label '" << label_text << "' not in class map";
                throw DatasetParseError(msg.str());
            }
            label = it->second;
        } else {
            const auto v = detail::parse_double(label_text);
            if (!v && lineno == 1 && rows.empty()) continue;  // header
            if (!v || (*v != 0.0 && *v != 1.0)) {
                std::ostringstream msg;
                msg << "line " << lineno << ": label '" << label_text << "' is not binary (0/1)";
                throw DatasetParseError(msg.str());
            }
            label = *v;
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            std::ostringstream msg;
            msg << "line " << lineno << ": ragged row (" << row.size() << " features, expected " << width << ")";
            throw DatasetParseError(msg.str());
        }
        rows.push_back(std::move(row));
        labels.push_back(label);
    }
    if (rows.empty()) throw DatasetParseError("dataset contains no data rows");

    Dataset ds;
    ds.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    ds.y.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) ds.X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        ds.y(static_cast<Index>(i)) = labels[i];
    }
    ds.augment();
    ds.validate();
    return ds;
}

// Loads a CSV file, or a JSON manifest of the form
//   {"file": "statlog.csv", "label_column": -1, "delimiter": ",",
//    "class_map": {"1": 0, "2": 1}}
// with "file" resolved relative to the manifest.
inline Dataset load_dataset(const std::filesystem::path& path) {
    CsvOptions opts;
    std::filesystem::path csv = path;
    if (path.extension() == ".json") {
        std::ifstream mf(path);
        if (!mf) throw DatasetParseError("cannot open manifest " + path.string());
        nlohmann::json j;
        try {
            mf >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DatasetParseError("manifest " + path.string() + ": " + e.what());
        }
        csv = path.parent_path() / j.at("file").get<std::string>();
        opts.label_column = j.value("label_column", -1);
        opts.delimiter = j.value("delimiter", std::string(",")).at(0);
        if (j.contains("class_map"))
            for (const auto& [k, v] : j.at("class_map").items()) opts.class_map[k] = v.get<int>();
    }
    std::ifstream in(csv);
    if (!in) throw DatasetParseError("cannot open dataset " + csv.string());
    try {
        return parse_dataset_csv(in, opts);
    } catch (const DatasetParseError& e) {
        throw DatasetParseError(csv.string() + ": " + e.what());
    }
}

// FNV-1a over the design and labels; keys the reference cache.
inline std::uint64_t dataset_fingerprint(const Dataset& ds) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* p, std::size_t bytes) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= c[i];
            h *= 1099511628211ULL;
        }
    };
    const Index rows = ds.X.rows(), cols = ds.X.cols();
    mix(&rows, sizeof rows);
    mix(&cols, sizeof cols);
    mix(ds.X.data(), sizeof(double) * static_cast<std::size_t>(ds.X.size()));
    mix(ds.y.data(), sizeof(double) * static_cast<std::size_t>(ds.y.size()));
    return h;
}

} // namespace splithmc
