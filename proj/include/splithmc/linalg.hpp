#pragma once

// Dense symmetric kernels: cyclic Jacobi eigendecomposition, Cholesky
// factorization and the triangular solves built on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace splithmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

class NotSpdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require_same_size(Index expected, Index got, const char* what) {
    if (expected != got) {
        std::ostringstream msg;
        msg << what << ": dimension mismatch (expected " << expected << ", got " << got << ")";
        throw DimensionError(msg.str());
    }
}

// Symmetric matrix; symmetry is enforced on construction by averaging with
// the transpose, so entries(i,j) == entries(j,i) holds exactly.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(const Matrix& m) {
        if (m.rows() < 1 || m.rows() != m.cols()) {
            std::ostringstream msg;
            msg << "SymMatrix: expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
            throw DimensionError(msg.str());
        }
        m_ = 0.5 * (m + m.transpose());
    }

    static SymMatrix identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }

    static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

    Index size() const { return m_.rows(); }
    double operator()(Index i, Index j) const { return m_(i, j); }
    const Matrix& matrix() const { return m_; }

    double max_abs() const { return std::max(m_.cwiseAbs().maxCoeff(), 1e-300); }

private:
    Matrix m_;
};

// J = Z^T diag(D) Z. Rows of Z are the eigenvectors; D is ascending.
struct EigenDecomp {
    Matrix Z;
    Vector D;

    Matrix reconstruct() const { return Z.transpose() * D.asDiagonal() * Z; }
};

// J = B B^T with B lower triangular.
struct CholFactor {
    Matrix B;

    Index size() const { return B.rows(); }
    Matrix reconstruct() const { return B * B.transpose(); }
};

struct JacobiOptions {
    double relative_tolerance = 1e-13;
    int max_sweeps = 100;
};

inline EigenDecomp sym_eigen(const SymMatrix& J, JacobiOptions opts = {}) {
    const Index n = J.size();
    Matrix a = J.matrix();
    Matrix v = Matrix::Identity(n, n);
    const double scale = std::max(a.norm(), 1e-300);

    auto off_diagonal = [&] {
        double s = 0.0;
        for (Index q = 1; q < n; ++q)
            for (Index p = 0; p < q; ++p) s += 2.0 * a(p, q) * a(p, q);
        return std::sqrt(s);
    };

    double off = off_diagonal();
    int sweep = 0;
    while (off > opts.relative_tolerance * scale) {
        if (sweep == opts.max_sweeps) {
            std::ostringstream msg;
            msg << "sym_eigen: no convergence after " << opts.max_sweeps
                << " sweeps, off-diagonal residual " << off << " (relative " << off / scale << ")";
            throw ConvergenceError(msg.str());
        }
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rutishauser's rotation: annihilates a(p,q).
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        ++sweep;
        off = off_diagonal();
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });

    EigenDecomp out{Matrix(n, n), Vector(n)};
    for (Index r = 0; r < n; ++r) {
        const Index src = order[static_cast<std::size_t>(r)];
        out.D(r) = a(src, src);
        out.Z.row(r) = v.col(src).transpose();
    }
    if (!(out.D(0) > 0.0)) {
        std::ostringstream msg;
        msg << "sym_eigen: matrix is not SPD (smallest eigenvalue " << out.D(0) << ")";
        throw NotSpdError(msg.str());
    }
    return out;
}

inline CholFactor cholesky(const SymMatrix& J) {
    const Index n = J.size();
    const Matrix& a = J.matrix();
    const double floor = 1e-14 * a.diagonal().cwiseAbs().maxCoeff();
    Matrix b = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        double pivot = a(j, j) - b.row(j).head(j).squaredNorm();
        if (!(pivot > floor)) {
            std::ostringstream msg;
            msg << "cholesky: matrix is not SPD (pivot " << j << " = " << pivot << ")";
            throw NotSpdError(msg.str());
        }
        const double bjj = std::sqrt(pivot);
        b(j, j) = bjj;
        for (Index i = j + 1; i < n; ++i)
            b(i, j) = (a(i, j) - b.row(i).head(j).dot(b.row(j).head(j))) / bjj;
    }
    return CholFactor{std::move(b)};
}

// Solves B B^T x = r.
inline Vector chol_solve(const CholFactor& f, const Vector& r) {
    require_same_size(f.size(), r.size(), "chol_solve");
    Vector y = f.B.triangularView<Eigen::Lower>().solve(r);
    return f.B.transpose().triangularView<Eigen::Upper>().solve(y);
}

// Maps iid standard normals z to B^{-T} z, whose covariance is J^{-1}.
inline Vector chol_sample_velocity(const CholFactor& f, const Vector& z) {
    require_same_size(f.size(), z.size(), "chol_sample_velocity");
    return f.B.transpose().triangularView<Eigen::Upper>().solve(z);
}

} // namespace splithmc
