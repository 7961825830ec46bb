#include "composa/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "composa/curvature.hpp"
#include "composa/error.hpp"
#include "composa/sparse_cholesky.hpp"
#include "composa/subgradient.hpp"

namespace composa {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<Index> to_index_list(const std::vector<double>& v, const std::string& key) {
    std::vector<Index> out;
    for (double d : v) {
        if (d < 1.0 || std::floor(d) != d) throw ConfigError(key + ": expected positive integers");
        out.push_back(static_cast<Index>(d));
    }
    return out;
}

double rel_diff(std::span<const double> a, std::span<const double> ref) {
    return norm2(subtract(a, ref)) / std::max(norm2(ref), 1e-300);
}

Vector negated(std::span<const double> v) {
    Vector out(v.begin(), v.end());
    for (double& x : out) x = -x;
    return out;
}

}  // namespace

SampleStats sample_stats(std::vector<double> samples) {
    SampleStats s;
    s.count = samples.size();
    if (samples.empty()) return s;
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(s.count);
    for (double x : samples) s.variance += (x - s.mean) * (x - s.mean);
    s.variance /= static_cast<double>(s.count);
    std::sort(samples.begin(), samples.end());
    const std::size_t h = s.count / 2;
    s.median = s.count % 2 ? samples[h] : 0.5 * (samples[h - 1] + samples[h]);
    return s;
}

nlohmann::json to_json(const SampleStats& s) {
    return {{"mean", s.mean}, {"median", s.median}, {"variance", s.variance}, {"count", s.count}};
}

SystemSnapshot system_at(const ProblemSpec& p, std::span<const double> x, const SolverConfig& cfg) {
    const SparseMatrix& c = p.penalty();
    const double tol_act = cfg.tol_act.value_or(default_tol_act(x));
    SubgradientState state = min_norm_subgradient(p, p.gradient(x), classify_indices(c, x, tol_act), std::nullopt, cfg.qp);
    CurvatureInfo curv = p.smooth().curvature(x);
    const double kappa = cfg.kappa_min.value_or(default_kappa_min(curv));
    SystemOperator sys(std::move(curv), HuberOperator(c, x, cfg.gamma), p.beta(), kappa);
    return {std::move(state), std::move(sys)};
}

GammaSweepResult bench_gamma_sweep(const Config& cfg, std::size_t repeats) {
    GammaSweepResult res;
    res.gammas = cfg.get_list("bench.gammas", {0.0, 50.0, 500.0, 1000.0});
    res.betas = cfg.get_list("bench.betas", {0.1, 0.5, 0.9});
    res.iters = cfg.get_size("bench.iters", 50);
    repeats = std::max<std::size_t>(repeats, 1);
    res.cost.assign(res.gammas.size(), std::vector<double>(res.betas.size(), 0.0));
    res.wall_ms.assign(res.gammas.size(), std::vector<SampleStats>(res.betas.size()));
    for (std::size_t bi = 0; bi < res.betas.size(); ++bi) {
        Config local = cfg;
        local.set("problem.beta", io::format_double(res.betas[bi]));
        const ProblemInstance inst = problem_from_config(local);
        for (std::size_t gi = 0; gi < res.gammas.size(); ++gi) {
            SolverConfig s = solver_config_from(local);
            s.gamma = res.gammas[gi];
            s.max_iter = res.iters;
            std::vector<double> times;
            for (std::size_t r = 0; r < repeats; ++r) {
                const SolveReport rep = gsom_solve(*inst.spec, inst.x0, s);
                res.cost[gi][bi] = rep.cost_final;
                times.push_back(rep.wall_ms);
            }
            res.wall_ms[gi][bi] = sample_stats(std::move(times));
        }
    }
    return res;
}

ActiveSetResult bench_active_set(const Config& cfg, std::size_t repeats) {
    const std::vector<double> betas = cfg.get_list("bench.betas", {0.5, 0.9});
    const double frac = cfg.get_double("bench.frozen_fraction", 0.3);
    ActiveSetResult res;
    for (double beta : betas) {
        Config local = cfg;
        local.set("problem.beta", io::format_double(beta));
        const ProblemInstance inst = problem_from_config(local);
        SolverConfig s = solver_config_from(local);
        s.active_set_reduction = true;
        s.time_full_direction = true;
        s.max_iter = cfg.get_size("bench.iters", 50);
        res.dim = inst.spec->dim();
        const double threshold = frac * static_cast<double>(res.dim);
        for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
            const SolveReport rep = gsom_solve(*inst.spec, inst.x0, s);
            res.iterations += rep.iterations;
            for (const auto& rec : rep.trace) {
                if (static_cast<double>(rec.n_frozen) < threshold) continue;
                ++res.eligible;
                res.reduced_ms.push_back(rec.direction_ms);
                res.full_ms.push_back(rec.full_direction_ms);
            }
        }
    }
    return res;
}

LinsolveResult bench_linsolve(const Config& cfg, std::size_t repeats) {
    LinsolveResult res;
    res.grid_sizes = to_index_list(cfg.get_list("bench.sizes", {40, 50, 60}), "bench.sizes");
    const std::size_t warm = cfg.get_size("bench.warm_iters", 5);
    repeats = std::max<std::size_t>(repeats, 1);
    const std::size_t nm = kLinsolveMethods.size();
    res.ms.assign(nm, std::vector<std::vector<double>>(res.grid_sizes.size()));
    res.rel_diff.assign(nm, std::vector<double>(res.grid_sizes.size(), 0.0));

    for (std::size_t gi = 0; gi < res.grid_sizes.size(); ++gi) {
        Config local = cfg;
        local.set("problem.grid_n", std::to_string(res.grid_sizes[gi]));
        const ProblemInstance inst = problem_from_config(local);
        SolverConfig s = solver_config_from(local);
        Vector x = inst.x0;
        if (warm > 0) {
            s.max_iter = warm;
            x = gsom_solve(*inst.spec, inst.x0, s).x_final;
        }
        const SystemSnapshot snap = system_at(*inst.spec, x, s);
        const SparseMatrix& m = snap.system.assembled();
        const Vector rhs = negated(snap.state.residual);
        res.dims.push_back(m.rows());

        std::vector<Vector> sol(nm);
        for (std::size_t r = 0; r < repeats; ++r) {
            for (std::size_t k = 0; k < nm; ++k) {
                const auto t0 = Clock::now();
                if (kLinsolveMethods[k] == "direct_dense") {
                    auto d = dense_cholesky_solve(m, rhs);
                    if (!d) throw Error("bench linsolve: dense factorization failed");
                    sol[k] = std::move(*d);
                } else if (kLinsolveMethods[k] == "direct_sparse") {
                    auto chol = SparseCholesky::factor(m);
                    if (!chol) throw Error("bench linsolve: sparse factorization failed");
                    sol[k] = chol->solve(rhs);
                } else {
                    LinearSolverConfig lc = s.linsolve;
                    lc.kind = LinearSolverKind::Pcg;
                    sol[k] = solve_direction(snap.system, snap.state.residual, nullptr, lc).d;
                }
                res.ms[k][gi].push_back(ms_since(t0));
            }
        }
        for (std::size_t k = 0; k < nm; ++k) res.rel_diff[k][gi] = rel_diff(sol[k], sol[1]);
    }
    return res;
}

BlockJacobiResult bench_block_jacobi(const Config& cfg) {
    const ProblemInstance inst = problem_from_config(cfg);
    SolverConfig s = solver_config_from(cfg);
    s.max_iter = cfg.get_size("bench.iters", 20);

    BlockJacobiResult res;
    res.dim = inst.spec->dim();
    res.partitions = s.linsolve.partitions;
    res.overlap = s.linsolve.overlap;

    SolverConfig full = s;
    full.linsolve.kind = LinearSolverKind::Direct;
    SolverConfig block = s;
    block.linsolve.kind = LinearSolverKind::BlockJacobi;
    const SolveReport rf = gsom_solve(*inst.spec, inst.x0, full);
    const SolveReport rb = gsom_solve(*inst.spec, inst.x0, block);
    res.cost_full = rf.cost_final;
    res.cost_block = rb.cost_final;
    res.termination_full = rf.termination;
    res.termination_block = rb.termination;
    for (const auto& rec : rf.trace) res.full_ms.push_back(rec.direction_ms);
    for (const auto& rec : rb.trace) res.block_ms.push_back(rec.direction_ms);

    for (const Vector* x : {&inst.x0, &rf.x_final}) {
        const SystemSnapshot snap = system_at(*inst.spec, *x, full);
        const SparseMatrix& m = snap.system.assembled();
        auto chol = SparseCholesky::factor(m);
        if (!chol) throw Error("bench block_jacobi: full factorization failed");
        const Vector d_full = chol->solve(negated(snap.state.residual));
        const DirectionResult bj = block_jacobi_solve(m, snap.state.residual, block.linsolve);
        if (norm2(d_full) > 0.0) res.direction_rel_diff = std::max(res.direction_rel_diff, rel_diff(bj.d, d_full));
        res.max_block_dim = std::max(res.max_block_dim, bj.max_block_dim);
        if (x == &inst.x0) {
            res.factor_nnz_full = chol->factor_nnz();
            for (const auto& [lo, hi] : block_ranges(m.rows(), res.partitions, res.overlap)) {
                std::vector<Index> idx(hi - lo);
                std::iota(idx.begin(), idx.end(), lo);
                auto bc = SparseCholesky::factor(principal_submatrix(m, idx));
                if (bc) res.factor_nnz_blocks += bc->factor_nnz();
            }
        }
    }
    return res;
}

}  // namespace composa
