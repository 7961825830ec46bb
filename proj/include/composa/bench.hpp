#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "composa/config.hpp"
#include "composa/direction.hpp"
#include "composa/solver.hpp"

namespace composa {

struct SampleStats {
    double mean = 0.0;
    double median = 0.0;
    double variance = 0.0;  // population variance
    std::size_t count = 0;
};

SampleStats sample_stats(std::vector<double> samples);
nlohmann::json to_json(const SampleStats& s);

/// M, residual and partition of the Newton-type system at x.
struct SystemSnapshot {
    SubgradientState state;
    SystemOperator system;
};

SystemSnapshot system_at(const ProblemSpec& p, std::span<const double> x, const SolverConfig& cfg);

/// Final costs after a fixed iteration budget over a gamma x beta grid.
struct GammaSweepResult {
    std::vector<double> gammas;
    std::vector<double> betas;
    std::vector<std::vector<double>> cost;              // [gamma][beta]
    std::vector<std::vector<SampleStats>> wall_ms;      // [gamma][beta]
    std::size_t iters = 0;
};
GammaSweepResult bench_gamma_sweep(const Config& cfg, std::size_t repeats);

/// Reduced versus full direction time at iterations where at least
/// frozen_fraction * m coordinates are frozen, pooled over bench.betas.
struct ActiveSetResult {
    Index dim = 0;
    std::size_t iterations = 0;  // summed over runs
    std::size_t eligible = 0;    // summed over runs
    std::vector<double> reduced_ms;
    std::vector<double> full_ms;
};
ActiveSetResult bench_active_set(const Config& cfg, std::size_t repeats);

inline const std::vector<std::string> kLinsolveMethods = {"direct_dense", "direct_sparse", "pcg"};

/// Direction solve times on the system at a warm-started point, per grid size.
struct LinsolveResult {
    std::vector<Index> grid_sizes;
    std::vector<Index> dims;
    std::vector<std::vector<std::vector<double>>> ms;  // [method][size][repeat]
    std::vector<std::vector<double>> rel_diff;         // [method][size], vs direct_sparse
};
LinsolveResult bench_linsolve(const Config& cfg, std::size_t repeats);

/// Full direct solve versus overlapping block-Jacobi, per iteration.
struct BlockJacobiResult {
    Index dim = 0;
    std::size_t partitions = 0;
    double overlap = 0.0;
    Index max_block_dim = 0;
    Index factor_nnz_full = 0;
    Index factor_nnz_blocks = 0;  // summed over blocks
    double direction_rel_diff = 0.0;  // worst over the sampled points
    double cost_full = 0.0;
    double cost_block = 0.0;
    std::vector<double> full_ms;   // per iteration
    std::vector<double> block_ms;  // per iteration
    Termination termination_full = Termination::MaxIter;
    Termination termination_block = Termination::MaxIter;
};
BlockJacobiResult bench_block_jacobi(const Config& cfg);

}  // namespace composa
