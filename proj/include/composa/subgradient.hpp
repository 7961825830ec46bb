#pragma once

#include <optional>
#include <vector>

#include "composa/linalg.hpp"
#include "composa/problems.hpp"

namespace composa {

/// Rows of C split by the sign of <c_i, x> with a tolerance band.
struct IndexPartition {
    std::vector<Index> pos;
    std::vector<Index> neg;
    std::vector<Index> act;
    std::vector<int> sign;  // per row: +1, -1 or 0 (active)
    double tol_act = 0.0;
};

/// 1e-8 * (1 + ||x||_inf)
double default_tol_act(std::span<const double> x);

IndexPartition classify_indices(const SparseMatrix& c, std::span<const double> x, double tol_act);

/// grad f + beta * (sum_{P} c_i - sum_{N} c_i)
Vector tilde_grad(const SparseMatrix& c, double beta, std::span<const double> grad, const IndexPartition& part);
Vector tilde_grad(const ProblemSpec& p, std::span<const double> x, const IndexPartition& part);

struct MinSubOptions {
    double tol_qp = 1e-8;
    std::size_t maxit_qp = 500;
};

struct BoxQpResult {
    Vector xi;
    double objective = 0.0;
    double fixed_point_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
};

/// 0.5 * ||g + beta * C_A^T xi||^2
double min_norm_qp_objective(std::span<const double> g, const SparseMatrix& c_active, double beta,
                             std::span<const double> xi);

/// Minimizes the objective above over the box [-1, 1]^p by accelerated
/// projected gradient with restart. Never returns a point worse than the
/// warm start or the origin.
BoxQpResult solve_min_norm_qp(std::span<const double> g, const SparseMatrix& c_active, double beta,
                              std::optional<std::span<const double>> warm_start, const MinSubOptions& opts);

struct SubgradientState {
    IndexPartition partition;
    Vector gradient;  // grad f(x)
    Vector xi;        // full multiplier, length n
    Vector residual;  // grad f(x) + beta * C^T xi
    double residual_norm = 0.0;
    std::size_t qp_iters = 0;
    bool qp_converged = true;
};

/// Minimum-norm element of grad f(x) + beta * C^T d||.||_1(Cx). `warm_start`
/// holds one value per active row.
SubgradientState min_norm_subgradient(const ProblemSpec& p, std::span<const double> x, IndexPartition part,
                                      std::optional<std::span<const double>> warm_start = std::nullopt,
                                      const MinSubOptions& opts = {});
/// Same, with grad f(x) already evaluated.
SubgradientState min_norm_subgradient(const ProblemSpec& p, Vector gradient, IndexPartition part,
                                      std::optional<std::span<const double>> warm_start,
                                      const MinSubOptions& opts);

}  // namespace composa
