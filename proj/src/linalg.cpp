#include "composa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "composa/error.hpp"

namespace composa {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
    for (Index i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("subtract: length mismatch");
    Vector out(a.size());
    for (Index i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------

DenseMatrix::DenseMatrix(Index rows, Index cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix DenseMatrix::identity(Index n) {
    DenseMatrix a(n, n);
    for (Index i = 0; i < n; ++i) a(i, i) = 1.0;
    return a;
}

Vector DenseMatrix::matvec(std::span<const double> x) const {
    if (x.size() != cols_) throw DimensionError("DenseMatrix::matvec: dimension mismatch");
    Vector y(rows_);
    for (Index i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
    return y;
}

double DenseMatrix::max_diagonal() const {
    double m = 0.0;
    for (Index i = 0; i < std::min(rows_, cols_); ++i) m = std::max(m, (*this)(i, i));
    return m;
}

// ---------------------------------------------------------------------------

SparseMatrix::SparseMatrix(Index nrows, Index ncols)
    : nrows_(nrows), ncols_(ncols), row_ptr_(nrows + 1, 0) {}

SparseMatrix SparseMatrix::from_csr(Index nrows, Index ncols, std::vector<Index> row_ptr,
                                    std::vector<Index> col_idx, std::vector<double> values) {
    SparseMatrix m;
    m.nrows_ = nrows;
    m.ncols_ = ncols;
    m.row_ptr_ = std::move(row_ptr);
    m.col_idx_ = std::move(col_idx);
    m.values_ = std::move(values);
    return m;
}

SparseMatrix SparseMatrix::from_triplets(std::span<const Triplet> triplets, Index nrows, Index ncols) {
    for (const auto& t : triplets) {
        if (t.row >= nrows || t.col >= ncols) {
            throw IndexError("from_triplets: entry (" + std::to_string(t.row) + "," +
                             std::to_string(t.col) + ") outside " + std::to_string(nrows) + "x" +
                             std::to_string(ncols));
        }
    }
    std::vector<Index> order(triplets.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        const auto& ta = triplets[a];
        const auto& tb = triplets[b];
        return ta.row != tb.row ? ta.row < tb.row : ta.col < tb.col;
    });

    std::vector<Index> row_ptr(nrows + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());

    Index k = 0;
    while (k < order.size()) {
        const Index r = triplets[order[k]].row;
        const Index c = triplets[order[k]].col;
        double v = 0.0;
        while (k < order.size() && triplets[order[k]].row == r && triplets[order[k]].col == c) {
            v += triplets[order[k]].value;
            ++k;
        }
        if (v != 0.0) {
            cols.push_back(c);
            vals.push_back(v);
            ++row_ptr[r + 1];
        }
    }
    for (Index i = 0; i < nrows; ++i) row_ptr[i + 1] += row_ptr[i];
    return from_csr(nrows, ncols, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(Index n, double scale) {
    std::vector<double> d(n, scale);
    return diagonal(d);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
    const Index n = d.size();
    std::vector<Index> row_ptr(n + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (Index i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            cols.push_back(i);
            vals.push_back(d[i]);
        }
        row_ptr[i + 1] = cols.size();
    }
    return from_csr(n, n, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a) {
    std::vector<Index> row_ptr(a.rows() + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            if (a(i, j) != 0.0) {
                cols.push_back(j);
                vals.push_back(a(i, j));
            }
        }
        row_ptr[i + 1] = cols.size();
    }
    return from_csr(a.rows(), a.cols(), std::move(row_ptr), std::move(cols), std::move(vals));
}

double SparseMatrix::row_dot(Index i, std::span<const double> x) const {
    double s = 0.0;
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    return s;
}

double SparseMatrix::coeff(Index i, Index j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_ptr_[i] + static_cast<Index>(it - cols.begin())];
}

void SparseMatrix::matvec(std::span<const double> x, std::span<double> y) const {
    if (x.size() != ncols_ || y.size() != nrows_) throw DimensionError("matvec: dimension mismatch");
    for (Index i = 0; i < nrows_; ++i) y[i] = row_dot(i, x);
}

Vector SparseMatrix::matvec(std::span<const double> x) const {
    Vector y(nrows_);
    matvec(x, y);
    return y;
}

void SparseMatrix::matvec_t(std::span<const double> y, std::span<double> x) const {
    if (y.size() != nrows_ || x.size() != ncols_) throw DimensionError("matvec_t: dimension mismatch");
    std::fill(x.begin(), x.end(), 0.0);
    for (Index i = 0; i < nrows_; ++i) {
        const double yi = y[i];
        if (yi == 0.0) continue;
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) x[col_idx_[k]] += values_[k] * yi;
    }
}

Vector SparseMatrix::matvec_t(std::span<const double> y) const {
    Vector x(ncols_);
    matvec_t(y, x);
    return x;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<Index> row_ptr(ncols_ + 1, 0);
    for (Index c : col_idx_) ++row_ptr[c + 1];
    for (Index j = 0; j < ncols_; ++j) row_ptr[j + 1] += row_ptr[j];
    std::vector<Index> next(row_ptr.begin(), row_ptr.end() - 1);
    std::vector<Index> cols(nnz());
    std::vector<double> vals(nnz());
    for (Index i = 0; i < nrows_; ++i) {
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const Index dst = next[col_idx_[k]]++;
            cols[dst] = i;
            vals[dst] = values_[k];
        }
    }
    return from_csr(ncols_, nrows_, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::select_rows(std::span<const Index> idx) const {
    std::vector<Index> row_ptr(idx.size() + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (Index r = 0; r < idx.size(); ++r) {
        const Index i = idx[r];
        if (i >= nrows_) throw IndexError("select_rows: row " + std::to_string(i) + " out of range");
        cols.insert(cols.end(), col_idx_.begin() + row_ptr_[i], col_idx_.begin() + row_ptr_[i + 1]);
        vals.insert(vals.end(), values_.begin() + row_ptr_[i], values_.begin() + row_ptr_[i + 1]);
        row_ptr[r + 1] = cols.size();
    }
    return from_csr(idx.size(), ncols_, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::scale_rows(std::span<const double> w) const {
    if (w.size() != nrows_) throw DimensionError("scale_rows: weight length mismatch");
    std::vector<Index> row_ptr(nrows_ + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(nnz());
    vals.reserve(nnz());
    for (Index i = 0; i < nrows_; ++i) {
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const double v = values_[k] * w[i];
            if (v != 0.0) {
                cols.push_back(col_idx_[k]);
                vals.push_back(v);
            }
        }
        row_ptr[i + 1] = cols.size();
    }
    return from_csr(nrows_, ncols_, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::scaled(double s) const {
    std::vector<double> w(nrows_, s);
    return scale_rows(w);
}

Vector SparseMatrix::diagonal_values() const {
    if (nrows_ != ncols_) throw DimensionError("diagonal_values: matrix not square");
    Vector d(nrows_, 0.0);
    for (Index i = 0; i < nrows_; ++i) d[i] = coeff(i, i);
    return d;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix a(nrows_, ncols_);
    for (Index i = 0; i < nrows_; ++i) {
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) a(i, col_idx_[k]) = values_[k];
    }
    return a;
}

// ---------------------------------------------------------------------------

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimension mismatch");
    const Index n = a.rows();
    const Index p = b.cols();
    std::vector<Index> row_ptr(n + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    std::vector<double> acc(p, 0.0);
    std::vector<Index> marker(p, static_cast<Index>(-1));
    std::vector<Index> touched;

    for (Index i = 0; i < n; ++i) {
        touched.clear();
        auto acols = a.row_cols(i);
        auto avals = a.row_values(i);
        for (Index k = 0; k < acols.size(); ++k) {
            const Index r = acols[k];
            auto bcols = b.row_cols(r);
            auto bvals = b.row_values(r);
            for (Index t = 0; t < bcols.size(); ++t) {
                const Index c = bcols[t];
                if (marker[c] != i) {
                    marker[c] = i;
                    acc[c] = 0.0;
                    touched.push_back(c);
                }
                acc[c] += avals[k] * bvals[t];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (Index c : touched) {
            if (acc[c] != 0.0) {
                cols.push_back(c);
                vals.push_back(acc[c]);
            }
        }
        row_ptr[i + 1] = cols.size();
    }
    return SparseMatrix::from_csr(n, p, std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
    std::vector<Index> row_ptr(a.rows() + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(a.nnz() + b.nnz());
    vals.reserve(a.nnz() + b.nnz());
    auto push = [&](Index c, double v) {
        if (v != 0.0) {
            cols.push_back(c);
            vals.push_back(v);
        }
    };
    for (Index i = 0; i < a.rows(); ++i) {
        auto ac = a.row_cols(i);
        auto av = a.row_values(i);
        auto bc = b.row_cols(i);
        auto bv = b.row_values(i);
        Index p = 0, q = 0;
        while (p < ac.size() || q < bc.size()) {
            if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
                push(ac[p], alpha * av[p]);
                ++p;
            } else if (p == ac.size() || bc[q] < ac[p]) {
                push(bc[q], beta * bv[q]);
                ++q;
            } else {
                push(ac[p], alpha * av[p] + beta * bv[q]);
                ++p;
                ++q;
            }
        }
        row_ptr[i + 1] = cols.size();
    }
    return SparseMatrix::from_csr(a.rows(), a.cols(), std::move(row_ptr), std::move(cols), std::move(vals));
}

SparseMatrix vstack(const SparseMatrix& top, const SparseMatrix& bottom) {
    if (top.cols() != bottom.cols()) throw DimensionError("vstack: column count mismatch");
    std::vector<Index> row_ptr(top.row_ptr().begin(), top.row_ptr().end());
    const Index offset = top.nnz();
    for (Index i = 1; i <= bottom.rows(); ++i) row_ptr.push_back(offset + bottom.row_ptr()[i]);
    std::vector<Index> cols(top.col_indices().begin(), top.col_indices().end());
    cols.insert(cols.end(), bottom.col_indices().begin(), bottom.col_indices().end());
    std::vector<double> vals(top.values().begin(), top.values().end());
    vals.insert(vals.end(), bottom.values().begin(), bottom.values().end());
    return SparseMatrix::from_csr(top.rows() + bottom.rows(), top.cols(), std::move(row_ptr),
                                  std::move(cols), std::move(vals));
}

SparseMatrix principal_submatrix(const SparseMatrix& m, std::span<const Index> idx) {
    if (m.rows() != m.cols()) throw DimensionError("principal_submatrix: matrix not square");
    std::vector<Index> local(m.cols(), static_cast<Index>(-1));
    for (Index k = 0; k < idx.size(); ++k) {
        if (idx[k] >= m.rows()) throw IndexError("principal_submatrix: index out of range");
        local[idx[k]] = k;
    }
    std::vector<Index> row_ptr(idx.size() + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    std::vector<std::pair<Index, double>> row;
    for (Index k = 0; k < idx.size(); ++k) {
        row.clear();
        auto rc = m.row_cols(idx[k]);
        auto rv = m.row_values(idx[k]);
        for (Index t = 0; t < rc.size(); ++t) {
            if (local[rc[t]] != static_cast<Index>(-1)) row.emplace_back(local[rc[t]], rv[t]);
        }
        std::sort(row.begin(), row.end());
        for (const auto& [c, v] : row) {
            cols.push_back(c);
            vals.push_back(v);
        }
        row_ptr[k + 1] = cols.size();
    }
    return SparseMatrix::from_csr(idx.size(), idx.size(), std::move(row_ptr), std::move(cols), std::move(vals));
}

DenseMatrix gram_small(const SparseMatrix& m) {
    const Index n = m.rows();
    DenseMatrix g(n, n);
    Vector dense_row(m.cols(), 0.0);
    for (Index i = 0; i < n; ++i) {
        auto ci = m.row_cols(i);
        auto vi = m.row_values(i);
        for (Index t = 0; t < ci.size(); ++t) dense_row[ci[t]] = vi[t];
        for (Index j = 0; j <= i; ++j) {
            double s = 0.0;
            auto cj = m.row_cols(j);
            auto vj = m.row_values(j);
            for (Index t = 0; t < cj.size(); ++t) s += vj[t] * dense_row[cj[t]];
            g(i, j) = s;
            g(j, i) = s;
        }
        for (Index c : ci) dense_row[c] = 0.0;
    }
    return g;
}

SparseMatrix gram_sparse(const SparseMatrix& m) { return multiply(m, m.transpose()); }

// ---------------------------------------------------------------------------

std::optional<DenseCholesky> DenseCholesky::factor(const DenseMatrix& a, double pivot_rel) {
    if (a.rows() != a.cols()) throw DimensionError("DenseCholesky: matrix not square");
    const Index n = a.rows();
    const double max_diag = a.max_diagonal();
    if (n > 0 && !(max_diag > 0.0)) return std::nullopt;
    const double pivot_tol = pivot_rel * max_diag;

    DenseCholesky chol;
    chol.l_ = DenseMatrix(n, n);
    DenseMatrix& l = chol.l_;
    for (Index i = 0; i < n; ++i) {
        const double* li = &l(i, 0);
        for (Index j = 0; j <= i; ++j) {
            const double* lj = &l(j, 0);
            double s = a(i, j);
            for (Index k = 0; k < j; ++k) s -= li[k] * lj[k];
            if (i == j) {
                if (!(s > pivot_tol)) return std::nullopt;
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return chol;
}

Vector DenseCholesky::solve(std::span<const double> b) const {
    const Index n = l_.rows();
    if (b.size() != n) throw DimensionError("DenseCholesky::solve: dimension mismatch");
    Vector y(b.begin(), b.end());
    for (Index i = 0; i < n; ++i) {
        auto li = l_.row(i);
        double s = y[i];
        for (Index k = 0; k < i; ++k) s -= li[k] * y[k];
        y[i] = s / li[i];
    }
    for (Index i = n; i-- > 0;) {
        auto li = l_.row(i);
        y[i] /= li[i];
        const double xi = y[i];
        for (Index k = 0; k < i; ++k) y[k] -= li[k] * xi;
    }
    return y;
}

std::optional<Vector> chol_solve(const DenseMatrix& a, std::span<const double> b) {
    if (a.rows() != b.size()) throw DimensionError("chol_solve: dimension mismatch");
    auto chol = DenseCholesky::factor(a);
    if (!chol) return std::nullopt;
    return chol->solve(b);
}

// ---------------------------------------------------------------------------

PcgResult pcg_solve(const LinearOperator& apply_a, std::span<const double> b,
                    const LinearOperator& precond, double tol, std::size_t maxit) {
    const Index n = b.size();
    PcgResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    Vector r(b.begin(), b.end());
    Vector z(n), p(n), ap(n);
    precond(r, z);
    p = z;
    double rz = dot(r, z);
    double rnorm = bnorm;
    for (std::size_t it = 0; it < maxit; ++it) {
        apply_a(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        axpy(alpha, p, res.x);
        axpy(-alpha, ap, r);
        res.iterations = it + 1;
        rnorm = norm2(r);
        if (rnorm <= tol * bnorm) {
            res.converged = true;
            break;
        }
        precond(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (Index i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.relative_residual = rnorm / bnorm;
    return res;
}

LinearOperator jacobi_preconditioner(Vector diagonal) {
    for (double& d : diagonal) d = d > 0.0 ? 1.0 / d : 1.0;
    return [inv = std::move(diagonal)](std::span<const double> x, std::span<double> y) {
        for (Index i = 0; i < x.size(); ++i) y[i] = inv[i] * x[i];
    };
}

double op_norm_estimate(const LinearOperator& apply_a, Index dim, std::size_t iters) {
    if (dim == 0) return 0.0;
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Vector v(dim), w(dim);
    for (auto& e : v) e = unif(rng);
    double nv = norm2(v);
    for (auto& e : v) e /= nv;
    double lambda = 0.0;
    for (std::size_t it = 0; it < std::max<std::size_t>(iters, 1); ++it) {
        apply_a(v, w);
        lambda = dot(v, w);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        for (Index i = 0; i < dim; ++i) v[i] = w[i] / nw;
    }
    apply_a(v, w);
    return std::max(lambda, dot(v, w));
}

LinearOperator as_operator(const SparseMatrix& m) {
    return [&m](std::span<const double> x, std::span<double> y) { m.matvec(x, y); };
}

}  // namespace composa
