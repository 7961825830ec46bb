#pragma once

#include <utility>

#include "composa/linalg.hpp"
#include "composa/problems.hpp"
#include "composa/solver.hpp"

namespace composa {

struct AdmmConfig {
    double rho = 1.0;
    double tol = 1e-8;
    std::size_t maxit = 10000;
    bool residual_balancing = true;
    double balance_ratio = 10.0;   // adapt when one residual exceeds the other by this
    double balance_factor = 2.0;   // rho multiplier per adaptation
};

struct AdmmResult {
    SolveReport report;
    Vector z;  // split variable, approximately C x
    Vector u;  // scaled dual
    double rho = 1.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

/// Scaled ADMM on min f(x) + beta ||z||_1 s.t. C x = z, for an explicit
/// quadratic f. The trace uses the same schema as gsom_solve; `residual`
/// holds max(primal, dual). Throws NonQuadraticSmoothPart otherwise.
AdmmResult admm_solve(const ProblemSpec& p, const AdmmConfig& cfg = {});

/// Multiplier estimate clamp(rho * u / beta, -1, 1).
Vector admm_multiplier(const AdmmResult& r, double beta);

Vector soft_threshold(std::span<const double> v, double t);

struct GridQpResult {
    Vector xi;
    double objective = 0.0;
};

/// Exhaustive search of 0.5 ||g + beta C_A^T xi||^2 over a grid on [-1, 1]^p, p <= 3.
GridQpResult grid_oracle_qp(std::span<const double> g, const SparseMatrix& c_active, double beta,
                            double step = 0.01);

struct GridPhiResult {
    Vector x;
    double cost = 0.0;
};

/// Grid search of phi over [lo, hi]^m (m <= 2), then one refinement pass
/// with spacing step / 100 around the best point.
GridPhiResult grid_oracle_phi(const ProblemSpec& p, double lo, double hi, double step);

}  // namespace composa
