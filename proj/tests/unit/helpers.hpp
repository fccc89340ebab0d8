#pragma once

#include <cmath>
#include <random>

#include <splithmc/linalg.hpp>

namespace testutil {

using splithmc::Index;
using splithmc::Matrix;
using splithmc::SymMatrix;
using splithmc::Vector;

inline Vector random_vector(std::mt19937_64& g, Index n, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = nd(g);
    return v;
}

inline Matrix random_matrix(std::mt19937_64& g, Index r, Index c) {
    std::normal_distribution<double> nd;
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = nd(g);
    return m;
}

// A A^T + shift I, symmetrized.
inline SymMatrix random_spd(std::mt19937_64& g, Index n, double shift = 0.5) {
    const Matrix a = random_matrix(g, n, n);
    Matrix s = a * a.transpose();
    s.diagonal().array() += shift;
    return SymMatrix(s);
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

} // namespace testutil
