#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "composa/linalg.hpp"

namespace testsupport {

using composa::Index;
using composa::SparseMatrix;
using composa::Triplet;
using composa::Vector;

inline Vector random_vector(std::mt19937_64& rng, Index n, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Vector v(n);
    for (double& x : v) x = d(rng);
    return v;
}

inline SparseMatrix random_sparse(std::mt19937_64& rng, Index rows, Index cols, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<Triplet> t;
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            if (u(rng) < density) t.push_back({i, j, d(rng)});
        }
    }
    return SparseMatrix::from_triplets(t, rows, cols);
}

// Entry-wise dense product M^T M + shift * I, built without library kernels.
inline SparseMatrix random_spd(std::mt19937_64& rng, Index n, double shift) {
    const SparseMatrix a = random_sparse(rng, n, n, 0.3);
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            double s = i == j ? shift : 0.0;
            for (Index k = 0; k < n; ++k) s += a.coeff(k, i) * a.coeff(k, j);
            t.push_back({i, j, s});
        }
    }
    return SparseMatrix::from_triplets(t, n, n);
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double norm1_of(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace testsupport
