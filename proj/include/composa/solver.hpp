#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "composa/direction.hpp"
#include "composa/geometry.hpp"
#include "composa/linalg.hpp"
#include "composa/problems.hpp"
#include "composa/subgradient.hpp"

namespace composa {

enum class Termination { ResidualSmall, StepSmall, CostSmall, MaxIter, Stalled };

std::string to_string(Termination t);

/// gamma_k = min(gamma, gamma0 * ratio^k) when enabled.
struct GammaWarmup {
    bool enabled = false;
    double gamma0 = 50.0;
    double ratio = 2.0;
};

struct SolverConfig {
    double gamma = 1000.0;
    GammaWarmup warmup;
    double tol_x = 1e-8;
    double tol_f = 1e-10;
    double tol_residual = 1e-6;
    std::size_t max_iter = 500;
    std::optional<double> tol_act;    // default 1e-8 * (1 + ||x||_inf)
    std::optional<double> eps_act;    // default 1e-6 * (1 + ||v||_inf)
    std::optional<double> kappa_min;  // default from the curvature trace
    bool active_set_reduction = false;
    /// With reduction on, also solve the full system each iteration and
    /// record its time (the full direction is discarded).
    bool time_full_direction = false;
    MinSubOptions qp;
    LinearSolverConfig linsolve;
    LineSearchConfig linesearch;
    std::uint64_t seed = 0;

    /// Throws ConfigError on non-positive tolerances or max_iter == 0.
    void validate() const;
};

struct IterationRecord {
    std::size_t iter = 0;
    double cost = 0.0;      // cost after the step
    double residual = 0.0;  // residual norm at the start of the iteration
    double step = 0.0;
    Index n_active = 0;
    Index n_signchange = 0;
    Index n_frozen = 0;
    std::size_t qp_iters = 0;
    double lin_residual = 0.0;
    double wall_ms = 0.0;
    double direction_ms = 0.0;
    double full_direction_ms = 0.0;  // only with time_full_direction
    double gamma = 0.0;
    bool stalled = false;
};

struct SolveReport {
    std::string method = "gsom";
    Vector x_final;
    double cost_initial = 0.0;
    double cost_final = 0.0;
    double residual_final = 0.0;
    Termination termination = Termination::MaxIter;
    std::size_t iterations = 0;
    std::vector<IterationRecord> trace;
    double wall_ms = 0.0;
};

struct IterateSnapshot {
    Vector x;
    double cost = 0.0;
    double residual_norm = 0.0;
    std::size_t iter = 0;
};

/// First satisfied criterion in the order ResidualSmall, StepSmall (step and
/// cost change both small), MaxIter. `residual_scale` is 1 + |phi(x0)|.
std::optional<Termination> check_stop(const IterateSnapshot* prev, const IterateSnapshot& curr,
                                      const SolverConfig& cfg, double residual_scale);

SolveReport gsom_solve(const ProblemSpec& p, std::span<const double> x0, const SolverConfig& cfg);

}  // namespace composa
