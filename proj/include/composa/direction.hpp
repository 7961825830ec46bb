#pragma once

#include <string>
#include <utility>
#include <vector>

#include "composa/curvature.hpp"
#include "composa/linalg.hpp"
#include "composa/subgradient.hpp"

namespace composa {

/// Coordinates frozen at their current value versus those free to move.
struct ActiveSplit {
    std::vector<Index> frozen;
    std::vector<Index> free;
    double eps_act = 0.0;
};

/// 1e-6 * (1 + ||residual||_inf)
double default_eps_act(std::span<const double> residual);

/// j is frozen iff some active row touches j and |residual_j| <= eps_act.
ActiveSplit identify_active(const SparseMatrix& c, const IndexPartition& part, std::span<const double> residual,
                            double eps_act);

enum class LinearSolverKind { Auto, Direct, Pcg, BlockJacobi };

std::string to_string(LinearSolverKind kind);
LinearSolverKind parse_linear_solver_kind(const std::string& name);

struct LinearSolverConfig {
    LinearSolverKind kind = LinearSolverKind::Auto;
    double tol = 1e-8;
    std::size_t maxit = 2000;        // PCG iterations
    std::size_t partitions = 4;      // block-Jacobi
    double overlap = 0.2;            // block-Jacobi, fraction of a block
    std::size_t block_maxit = 200;   // block-Jacobi sweeps
    Index direct_max_dim = 2500;     // Auto picks direct up to this size
};

struct DirectionResult {
    Vector d;
    LinearSolverKind solver_used = LinearSolverKind::Direct;
    double linear_residual = 0.0;
    bool reduced = false;
    Index frozen_count = 0;
    bool fell_back = false;
    bool converged = true;
    std::size_t iterations = 0;
    Index max_block_dim = 0;
};

/// Solves M d = -residual, optionally restricted to the free coordinates of
/// `split` (frozen coordinates get d_j = 0). Iterative solvers that miss the
/// tolerance fall back to a direct factorization.
DirectionResult solve_direction(const SystemOperator& m, std::span<const double> residual,
                                const ActiveSplit* split, const LinearSolverConfig& cfg);

/// Contiguous blocks of ceil(dim / p) coordinates, each widened by
/// floor(overlap * block) on every interior side. Half-open ranges.
std::vector<std::pair<Index, Index>> block_ranges(Index dim, std::size_t partitions, double overlap);

/// Additive overlapping block-Jacobi iteration for M d = -residual. Overlapped
/// corrections are averaged by cover count. Blocks are factored once.
DirectionResult block_jacobi_solve(const SparseMatrix& m, std::span<const double> residual,
                                   const LinearSolverConfig& cfg);

}  // namespace composa
