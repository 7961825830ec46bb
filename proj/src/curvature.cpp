#include "composa/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "composa/error.hpp"

namespace composa {

double huber_value(double t, double gamma) {
    const double a = std::abs(t);
    if (gamma * a <= 1.0) return 0.5 * gamma * t * t;
    return a - 0.5 / gamma;
}

double huber_grad_scalar(double t, double gamma) {
    const double a = std::abs(t);
    if (gamma * a <= 1.0) return gamma * t;
    return t / a;
}

double huber_penalty(const SparseMatrix& c, std::span<const double> x, double gamma) {
    double s = 0.0;
    for (Index i = 0; i < c.rows(); ++i) s += huber_value(c.row_dot(i, x), gamma);
    return s;
}

Vector huber_penalty_gradient(const SparseMatrix& c, std::span<const double> x, double gamma) {
    Vector w(c.rows());
    for (Index i = 0; i < c.rows(); ++i) w[i] = huber_grad_scalar(c.row_dot(i, x), gamma);
    return c.matvec_t(w);
}

// ---------------------------------------------------------------------------

HuberOperator::HuberOperator(const SparseMatrix& c, std::span<const double> x, double gamma)
    : dim_(c.cols()), gamma_(gamma), mask_(c.rows(), 0) {
    if (gamma < 0.0) throw Error("HuberOperator: gamma must be non-negative");
    if (x.size() != c.cols()) throw DimensionError("HuberOperator: x has wrong length");
    std::vector<Index> rows;
    if (gamma > 0.0) {
        for (Index i = 0; i < c.rows(); ++i) {
            if (gamma * std::abs(c.row_dot(i, x)) <= 1.0) {
                mask_[i] = 1;
                rows.push_back(i);
            }
        }
    }
    cd_ = c.select_rows(rows);
}

Index HuberOperator::mask_count() const { return cd_.rows(); }

void HuberOperator::apply(std::span<const double> v, std::span<double> out) const {
    if (v.size() != dim() || out.size() != dim()) throw DimensionError("HuberOperator::apply: wrong length");
    std::fill(out.begin(), out.end(), 0.0);
    for (Index i = 0; i < cd_.rows(); ++i) {
        const double t = gamma_ * cd_.row_dot(i, v);
        auto cols = cd_.row_cols(i);
        auto vals = cd_.row_values(i);
        for (Index k = 0; k < cols.size(); ++k) out[cols[k]] += vals[k] * t;
    }
}

const SparseMatrix& HuberOperator::assembled() const {
    if (!assembled_) {
        assembled_ = cd_.rows() == 0 ? SparseMatrix(dim(), dim()) : multiply(cd_.transpose(), cd_).scaled(gamma_);
    }
    return *assembled_;
}

Vector HuberOperator::diagonal() const {
    Vector d(dim(), 0.0);
    for (Index i = 0; i < cd_.rows(); ++i) {
        auto cols = cd_.row_cols(i);
        auto vals = cd_.row_values(i);
        for (Index k = 0; k < cols.size(); ++k) d[cols[k]] += gamma_ * vals[k] * vals[k];
    }
    return d;
}

HuberOperator build_huber_operator(const SparseMatrix& c, std::span<const double> x, double gamma) {
    return HuberOperator(c, x, gamma);
}

// ---------------------------------------------------------------------------

double default_kappa_min(const CurvatureInfo& b) {
    const Index m = b.dim();
    if (m == 0) return 1e-6;
    return 1e-6 * (1.0 + std::abs(b.trace()) / static_cast<double>(m));
}

double min_eigenvalue_estimate(const SparseMatrix& b, std::size_t iters) {
    const Index m = b.rows();
    if (m == 0) return 0.0;
    // Gershgorin gives an upper bound on lambda_max to shift by.
    double shift = 0.0;
    for (Index i = 0; i < m; ++i) {
        double s = 0.0;
        for (double v : b.row_values(i)) s += std::abs(v);
        shift = std::max(shift, s);
    }
    Vector tmp(m);
    const double mu = op_norm_estimate(
        [&](std::span<const double> x, std::span<double> y) {
            b.matvec(x, y);
            for (Index i = 0; i < m; ++i) y[i] = shift * x[i] - y[i];
        },
        m, iters);
    return shift - mu;
}

namespace {

// Gershgorin lower bound on the smallest eigenvalue.
double gershgorin_lower(const SparseMatrix& b) {
    double lo = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < b.rows(); ++i) {
        double diag = 0.0, off = 0.0;
        auto cols = b.row_cols(i);
        auto vals = b.row_values(i);
        for (Index k = 0; k < cols.size(); ++k) {
            if (cols[k] == i) {
                diag = vals[k];
            } else {
                off += std::abs(vals[k]);
            }
        }
        lo = std::min(lo, diag - off);
    }
    return b.rows() == 0 ? 0.0 : lo;
}

}  // namespace

SystemOperator::SystemOperator(CurvatureInfo b, HuberOperator huber, double beta, double kappa_min)
    : b_(std::move(b)), huber_(std::move(huber)), beta_(beta) {
    if (!(beta > 0.0)) throw Error("assemble_system: beta must be positive");
    if (!(kappa_min > 0.0)) throw Error("assemble_system: kappa_min must be positive");
    if (b_.dim() != huber_.dim()) throw DimensionError("assemble_system: curvature and penalty dimensions differ");
    switch (b_.kind) {
        case CurvatureInfo::Kind::Diagonal:
            for (double& h : b_.diagonal) h = std::max(h, kappa_min);
            break;
        case CurvatureInfo::Kind::Matrix: {
            // A PSD matrix has lambda_min >= max(0, Gershgorin bound); otherwise
            // fall back to the power-iteration estimate.
            const double lam_min = b_.spd_guaranteed ? std::max(0.0, gershgorin_lower(*b_.matrix))
                                                     : min_eigenvalue_estimate(*b_.matrix);
            shift_ = std::max(0.0, kappa_min - lam_min);
            break;
        }
        case CurvatureInfo::Kind::Gram:
            shift_ = kappa_min;
            break;
    }
}

void SystemOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dim() || y.size() != dim()) throw DimensionError("SystemOperator::apply: wrong length");
    Vector g(dim());
    huber_.apply(x, g);
    b_.apply(x, y);
    for (Index i = 0; i < dim(); ++i) y[i] += shift_ * x[i] + beta_ * g[i];
}

Vector SystemOperator::diagonal() const {
    Vector d = b_.diag();
    const Vector g = huber_.diagonal();
    for (Index i = 0; i < d.size(); ++i) d[i] += shift_ + beta_ * g[i];
    return d;
}

const SparseMatrix& SystemOperator::assembled() const {
    if (!assembled_) {
        SparseMatrix bhat;
        switch (b_.kind) {
            case CurvatureInfo::Kind::Diagonal: bhat = SparseMatrix::diagonal(b_.diagonal); break;
            case CurvatureInfo::Kind::Matrix:
                bhat = shift_ > 0.0 ? add(*b_.matrix, SparseMatrix::identity(dim(), shift_)) : *b_.matrix;
                break;
            case CurvatureInfo::Kind::Gram:
                bhat = add(multiply(b_.matrix->transpose(), *b_.matrix), SparseMatrix::identity(dim(), shift_));
                break;
        }
        assembled_ = huber_.gamma() == 0.0 ? std::move(bhat) : add(bhat, huber_.assembled(), 1.0, beta_);
    }
    return *assembled_;
}

SystemOperator assemble_system(const CurvatureInfo& b, HuberOperator huber, double beta, double kappa_min) {
    return SystemOperator(b, std::move(huber), beta, kappa_min);
}

}  // namespace composa
