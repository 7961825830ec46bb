#include "composa/sparse_cholesky.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>

#include "composa/error.hpp"

namespace composa {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct SparseCholesky::Impl {
    Eigen::SimplicialLDLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
};

SparseCholesky::SparseCholesky() : impl_(std::make_unique<Impl>()) {}
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;
SparseCholesky::~SparseCholesky() = default;

std::optional<SparseCholesky> SparseCholesky::factor(const SparseMatrix& a, double pivot_rel) {
    if (a.rows() != a.cols()) throw DimensionError("SparseCholesky: matrix not square");
    const Index n = a.rows();
    SparseCholesky out;
    out.dim_ = n;
    if (n == 0) return out;

    // CSR of a symmetric matrix read as CSC is its transpose, i.e. itself.
    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(a.nnz());
    double max_diag = 0.0;
    for (Index i = 0; i < n; ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        for (Index k = 0; k < cols.size(); ++k) {
            if (cols[k] >= i) trips.emplace_back(static_cast<int>(cols[k]), static_cast<int>(i), vals[k]);
            if (cols[k] == i) max_diag = std::max(max_diag, std::abs(vals[k]));
        }
    }
    if (!(max_diag > 0.0)) return std::nullopt;
    EigenSparse m(static_cast<int>(n), static_cast<int>(n));
    m.setFromTriplets(trips.begin(), trips.end());

    out.impl_->ldlt.compute(m);
    if (out.impl_->ldlt.info() != Eigen::Success) return std::nullopt;
    const auto& d = out.impl_->ldlt.vectorD();
    if (!(d.minCoeff() > pivot_rel * max_diag)) return std::nullopt;
    out.factor_nnz_ = static_cast<Index>(out.impl_->ldlt.matrixL().nestedExpression().nonZeros()) + n;
    return out;
}

Vector SparseCholesky::solve(std::span<const double> b) const {
    if (b.size() != dim_) throw DimensionError("SparseCholesky::solve: dimension mismatch");
    Vector x(dim_);
    if (dim_ == 0) return x;
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(dim_));
    Eigen::Map<Eigen::VectorXd> xm(x.data(), static_cast<Eigen::Index>(dim_));
    xm = impl_->ldlt.solve(bm);
    return x;
}

std::optional<Vector> dense_cholesky_solve(const SparseMatrix& a, std::span<const double> b) {
    const Index n = a.rows();
    if (a.cols() != n || b.size() != n) throw DimensionError("dense_cholesky_solve: dimension mismatch");
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Index i = 0; i < n; ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        for (Index k = 0; k < cols.size(); ++k) dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = vals[k];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(dense);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd x = llt.solve(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n)));
    return Vector(x.data(), x.data() + x.size());
}

}  // namespace composa
