#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "composa/linalg.hpp"
#include "composa/problems.hpp"

namespace composa {

/// Huber smoothing of |t|: gamma t^2 / 2 inside |t| <= 1/gamma, |t| - 1/(2 gamma) outside.
double huber_value(double t, double gamma);
/// t / max(1/gamma, |t|)
double huber_grad_scalar(double t, double gamma);

/// sum_i h_gamma(<c_i, x>)
double huber_penalty(const SparseMatrix& c, std::span<const double> x, double gamma);
/// C^T [h_gamma'(<c_i, x>)]_i
Vector huber_penalty_gradient(const SparseMatrix& c, std::span<const double> x, double gamma);

/// Weak Hessian gamma * C^T D C of the Huberized penalty at a point, where D
/// selects rows with |<c_i, x>| <= 1/gamma. gamma == 0 gives the zero
/// operator. The selected rows of C are copied.
class HuberOperator {
public:
    HuberOperator(const SparseMatrix& c, std::span<const double> x, double gamma);

    double gamma() const noexcept { return gamma_; }
    Index dim() const noexcept { return dim_; }
    const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
    Index mask_count() const;

    void apply(std::span<const double> v, std::span<double> out) const;
    /// Built on first use and cached.
    const SparseMatrix& assembled() const;
    Vector diagonal() const;

private:
    Index dim_;
    double gamma_;
    std::vector<std::uint8_t> mask_;
    SparseMatrix cd_;  // rows of C in the quadratic zone
    mutable std::optional<SparseMatrix> assembled_;
};

HuberOperator build_huber_operator(const SparseMatrix& c, std::span<const double> x, double gamma);

/// 1e-6 * (1 + |trace(B)| / m)
double default_kappa_min(const CurvatureInfo& b);

/// Minimum-eigenvalue estimate by power iteration on (lambda_max I - B).
double min_eigenvalue_estimate(const SparseMatrix& b, std::size_t iters = 100);

/// M = clamp(B) + beta * Gamma, symmetric positive definite with
/// v^T M v >= kappa_min ||v||^2.
class SystemOperator {
public:
    SystemOperator(CurvatureInfo b, HuberOperator huber, double beta, double kappa_min);

    Index dim() const noexcept { return huber_.dim(); }
    void apply(std::span<const double> x, std::span<double> y) const;
    Vector diagonal() const;
    /// Operator form is preferred (assembly would densify).
    bool prefers_operator() const noexcept { return b_.kind == CurvatureInfo::Kind::Gram; }
    const SparseMatrix& assembled() const;

    double shift() const noexcept { return shift_; }
    double beta() const noexcept { return beta_; }
    const HuberOperator& huber() const noexcept { return huber_; }
    const CurvatureInfo& curvature() const noexcept { return b_; }

private:
    CurvatureInfo b_;
    HuberOperator huber_;
    double beta_;
    double shift_ = 0.0;  // Matrix and Gram kinds
    mutable std::optional<SparseMatrix> assembled_;
};

SystemOperator assemble_system(const CurvatureInfo& b, HuberOperator huber, double beta, double kappa_min);

}  // namespace composa
