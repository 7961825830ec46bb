#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace composa {

using Index = std::size_t;
using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Dense vector helpers
// ---------------------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vector subtract(std::span<const double> a, std::span<const double> b);
/// Entries with a non-finite value make this return false.
bool all_finite(std::span<const double> a);

// ---------------------------------------------------------------------------
// Dense matrix (row-major). Only used for small systems.
// ---------------------------------------------------------------------------

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(Index rows, Index cols, double fill = 0.0);

    static DenseMatrix identity(Index n);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }

    double& operator()(Index i, Index j) { return data_[i * cols_ + j]; }
    double operator()(Index i, Index j) const { return data_[i * cols_ + j]; }

    std::span<double> row(Index i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(Index i) const { return {data_.data() + i * cols_, cols_}; }

    Vector matvec(std::span<const double> x) const;
    double max_diagonal() const;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Sparse matrix, compressed row storage.
//
// Column indices inside a row are strictly increasing and no stored entry is
// exactly zero. Instances are immutable once built.
// ---------------------------------------------------------------------------

struct Triplet {
    Index row;
    Index col;
    double value;
};

class SparseMatrix {
public:
    SparseMatrix() : row_ptr_(1, 0) {}
    /// Empty (all-zero) matrix of the given shape.
    SparseMatrix(Index nrows, Index ncols);

    /// Duplicates are summed, zeros dropped, rows sorted.
    /// Throws IndexError on an out-of-range index.
    static SparseMatrix from_triplets(std::span<const Triplet> triplets, Index nrows, Index ncols);
    static SparseMatrix identity(Index n, double scale = 1.0);
    static SparseMatrix diagonal(std::span<const double> d);
    static SparseMatrix from_dense(const DenseMatrix& a);

    Index rows() const noexcept { return nrows_; }
    Index cols() const noexcept { return ncols_; }
    Index nnz() const noexcept { return values_.size(); }

    std::span<const Index> row_cols(Index i) const {
        return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_values(Index i) const {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const Index> row_ptr() const noexcept { return row_ptr_; }
    std::span<const Index> col_indices() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    /// <c_i, x>
    double row_dot(Index i, std::span<const double> x) const;
    double coeff(Index i, Index j) const;

    Vector matvec(std::span<const double> x) const;
    void matvec(std::span<const double> x, std::span<double> y) const;
    Vector matvec_t(std::span<const double> y) const;
    void matvec_t(std::span<const double> y, std::span<double> x) const;

    SparseMatrix transpose() const;
    /// Rows appear in the order given; throws IndexError when out of range.
    SparseMatrix select_rows(std::span<const Index> idx) const;
    SparseMatrix scale_rows(std::span<const double> w) const;
    SparseMatrix scaled(double s) const;
    /// Diagonal entries (zero where absent). Requires a square matrix.
    Vector diagonal_values() const;
    DenseMatrix to_dense() const;

    /// Raw constructor used by kernels that already produce canonical rows.
    static SparseMatrix from_csr(Index nrows, Index ncols, std::vector<Index> row_ptr,
                                 std::vector<Index> col_idx, std::vector<double> values);

private:
    Index nrows_ = 0;
    Index ncols_ = 0;
    std::vector<Index> row_ptr_;
    std::vector<Index> col_idx_;
    std::vector<double> values_;
};

/// a * b
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);
/// alpha * a + beta * b
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0);
/// Rows of `top` followed by rows of `bottom`.
SparseMatrix vstack(const SparseMatrix& top, const SparseMatrix& bottom);
/// Principal submatrix M(idx, idx).
SparseMatrix principal_submatrix(const SparseMatrix& m, std::span<const Index> idx);
/// Dense M * M^T.
DenseMatrix gram_small(const SparseMatrix& m);
/// Sparse M * M^T.
SparseMatrix gram_sparse(const SparseMatrix& m);

// ---------------------------------------------------------------------------
// Dense Cholesky
// ---------------------------------------------------------------------------

class DenseCholesky {
public:
    /// Returns nullopt when a pivot falls below pivot_rel * max diagonal.
    static std::optional<DenseCholesky> factor(const DenseMatrix& a, double pivot_rel = 1e-12);

    Index dim() const noexcept { return l_.rows(); }
    Vector solve(std::span<const double> b) const;

private:
    DenseMatrix l_;  // lower factor, row-major
};

/// Solves a symmetric positive definite system; nullopt means not positive definite.
std::optional<Vector> chol_solve(const DenseMatrix& a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Iterative kernels
// ---------------------------------------------------------------------------

/// y = A x; x and y never alias.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct PcgResult {
    Vector x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Preconditioned conjugate gradients. Stops when ||b - A x|| <= tol * ||b||.
PcgResult pcg_solve(const LinearOperator& apply_a, std::span<const double> b,
                    const LinearOperator& precond, double tol, std::size_t maxit);

/// Jacobi preconditioner from a diagonal; non-positive entries act as 1.
LinearOperator jacobi_preconditioner(Vector diagonal);

/// Power-iteration estimate of the largest eigenvalue of a symmetric PSD
/// operator. Never exceeds the true value beyond roundoff.
double op_norm_estimate(const LinearOperator& apply_a, Index dim, std::size_t iters = 50);

LinearOperator as_operator(const SparseMatrix& m);

}  // namespace composa
