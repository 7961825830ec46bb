#pragma once

#include <memory>
#include <optional>

#include "composa/linalg.hpp"

namespace composa {

/// Sparse LDL^T factorization of a symmetric matrix with fill-reducing
/// ordering. Both triangles of the input must be stored.
class SparseCholesky {
public:
    /// nullopt when some pivot of D is <= pivot_rel * max|diag(A)|.
    static std::optional<SparseCholesky> factor(const SparseMatrix& a, double pivot_rel = 1e-12);

    SparseCholesky(SparseCholesky&&) noexcept;
    SparseCholesky& operator=(SparseCholesky&&) noexcept;
    ~SparseCholesky();

    Index dim() const noexcept { return dim_; }
    Index factor_nnz() const noexcept { return factor_nnz_; }
    Vector solve(std::span<const double> b) const;

private:
    struct Impl;
    SparseCholesky();

    std::unique_ptr<Impl> impl_;
    Index dim_ = 0;
    Index factor_nnz_ = 0;
};

/// Densifies a symmetric positive definite matrix and solves with a blocked
/// dense Cholesky. nullopt when the factorization fails.
std::optional<Vector> dense_cholesky_solve(const SparseMatrix& a, std::span<const double> b);

}  // namespace composa
