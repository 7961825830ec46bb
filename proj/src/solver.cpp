#include "composa/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "composa/curvature.hpp"
#include "composa/error.hpp"

namespace composa {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (Index i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

std::string to_string(Termination t) {
    switch (t) {
        case Termination::ResidualSmall: return "ResidualSmall";
        case Termination::StepSmall: return "StepSmall";
        case Termination::CostSmall: return "CostSmall";
        case Termination::MaxIter: return "MaxIter";
        case Termination::Stalled: return "Stalled";
    }
    return "Unknown";
}

void SolverConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string("solver: ") + name + " must be positive");
    };
    if (gamma < 0.0) throw ConfigError("solver: gamma must be non-negative");
    positive(tol_x, "tol_x");
    positive(tol_f, "tol_f");
    positive(tol_residual, "tol_residual");
    if (max_iter == 0) throw ConfigError("solver: max_iter must be at least 1");
    if (tol_act) positive(*tol_act, "tol_act");
    if (eps_act) positive(*eps_act, "eps_act");
    if (kappa_min) positive(*kappa_min, "kappa_min");
    if (warmup.enabled) {
        positive(warmup.gamma0, "gamma0");
        if (!(warmup.ratio > 1.0)) throw ConfigError("solver: gamma warm-up ratio must exceed 1");
    }
    positive(qp.tol_qp, "tol_qp");
    positive(linsolve.tol, "linsolve.tol");
    if (linsolve.partitions == 0) throw ConfigError("linsolve: partitions must be at least 1");
    if (linsolve.overlap < 0.0 || linsolve.overlap >= 0.5) throw ConfigError("linsolve: overlap must lie in [0, 0.5)");
    positive(linesearch.sigma, "linesearch.sigma");
    if (linesearch.sigma > 1.0) throw ConfigError("linesearch: sigma must not exceed 1");
    positive(linesearch.s_min, "linesearch.s_min");
}

std::optional<Termination> check_stop(const IterateSnapshot* prev, const IterateSnapshot& curr,
                                      const SolverConfig& cfg, double residual_scale) {
    if (curr.residual_norm <= cfg.tol_residual * residual_scale) return Termination::ResidualSmall;
    if (prev) {
        const bool step_small = distance(curr.x, prev->x) <= cfg.tol_x * (1.0 + norm2(prev->x));
        const bool cost_small = std::abs(curr.cost - prev->cost) <= cfg.tol_f * (1.0 + std::abs(prev->cost));
        if (step_small && cost_small) return Termination::StepSmall;
    }
    if (curr.iter >= cfg.max_iter) return Termination::MaxIter;
    return std::nullopt;
}

SolveReport gsom_solve(const ProblemSpec& p, std::span<const double> x0, const SolverConfig& cfg) {
    cfg.validate();
    const Index m = p.dim();
    if (x0.size() != m) throw DimensionError("gsom_solve: x0 has wrong length");
    const SparseMatrix& c = p.penalty();
    const auto t_start = Clock::now();

    SolveReport rep;
    Vector x(x0.begin(), x0.end());
    double cost = eval_cost(p, x);
    rep.cost_initial = cost;
    const double residual_scale = 1.0 + std::abs(cost);

    std::optional<IterateSnapshot> prev;
    Vector prev_xi;
    std::size_t iter = 0;

    while (true) {
        const auto t_iter = Clock::now();
        try {
            const double tol_act = cfg.tol_act.value_or(default_tol_act(x));
            IndexPartition part = classify_indices(c, x, tol_act);
            Vector warm;
            if (!prev_xi.empty()) {
                warm.reserve(part.act.size());
                for (Index i : part.act) warm.push_back(std::clamp(prev_xi[i], -1.0, 1.0));
            }
            std::optional<std::span<const double>> warm_span;
            if (!prev_xi.empty()) warm_span = std::span<const double>(warm);
            SubgradientState state = min_norm_subgradient(p, p.gradient(x), std::move(part), warm_span, cfg.qp);

            IterateSnapshot curr{x, cost, state.residual_norm, iter};
            rep.residual_final = state.residual_norm;
            if (auto stop = check_stop(prev ? &*prev : nullptr, curr, cfg, residual_scale)) {
                rep.termination = *stop;
                break;
            }

            // Second-order system.
            double gamma = cfg.gamma;
            if (cfg.warmup.enabled) {
                gamma = std::min(gamma, cfg.warmup.gamma0 * std::pow(cfg.warmup.ratio, static_cast<double>(iter)));
            }
            CurvatureInfo curv = p.smooth().curvature(x);
            const double kappa = cfg.kappa_min.value_or(default_kappa_min(curv));
            SystemOperator sys(std::move(curv), HuberOperator(c, x, gamma), p.beta(), kappa);

            std::optional<ActiveSplit> split;
            if (cfg.active_set_reduction) {
                ActiveSplit s = identify_active(c, state.partition, state.residual,
                                                cfg.eps_act.value_or(default_eps_act(state.residual)));
                double free_norm = 0.0;
                for (Index j : s.free) free_norm = std::max(free_norm, std::abs(state.residual[j]));
                if (!s.frozen.empty() && free_norm > 0.0) split = std::move(s);
            }

            IterationRecord rec;
            rec.iter = iter + 1;
            rec.residual = state.residual_norm;
            rec.n_active = state.partition.act.size();
            rec.qp_iters = state.qp_iters;
            rec.gamma = gamma;
            rec.n_frozen = split ? split->frozen.size() : 0;

            if (split && cfg.time_full_direction && !sys.prefers_operator()) sys.assembled();
            const auto t_dir = Clock::now();
            DirectionResult dir = solve_direction(sys, state.residual, split ? &*split : nullptr, cfg.linsolve);
            rec.direction_ms = ms_since(t_dir);
            if (split && cfg.time_full_direction) {
                const auto t_full = Clock::now();
                (void)solve_direction(sys, state.residual, nullptr, cfg.linsolve);
                rec.full_direction_ms = ms_since(t_full);
            }

            // M is SPD, so d^T v < 0 unless the linear solve went wrong.
            if (!(dot(dir.d, state.residual) < 0.0) && split) {
                dir = solve_direction(sys, state.residual, nullptr, cfg.linsolve);
                rec.n_frozen = 0;
            }
            if (!(dot(dir.d, state.residual) < 0.0)) {
                dir.d = state.residual;
                for (double& v : dir.d) v = -v;
            }
            rec.lin_residual = dir.linear_residual;

            LineSearchResult ls = projected_linesearch(p, x, cost, dir.d, state, cfg.linesearch);
            if (!ls.decreased) {
                const bool negligible = std::isfinite(ls.cost_next) &&
                                        std::abs(ls.cost_next - cost) <= cfg.tol_f * (1.0 + std::abs(cost));
                rep.termination = negligible ? Termination::CostSmall : Termination::Stalled;
                break;
            }

            rec.step = ls.step;
            rec.n_signchange = ls.sign_changes.size();
            rec.stalled = ls.stalled;
            rec.cost = ls.cost_next;

            prev = std::move(curr);
            prev_xi = std::move(state.xi);
            x = std::move(ls.x_next);
            cost = ls.cost_next;
            ++iter;
            rec.wall_ms = ms_since(t_iter);
            rep.trace.push_back(rec);
        } catch (const EvaluationError& e) {
            throw EvaluationError("iteration " + std::to_string(iter + 1) + ": " + e.what(), e.point());
        }
    }

    rep.x_final = std::move(x);
    rep.cost_final = cost;
    rep.iterations = iter;
    rep.wall_ms = ms_since(t_start);
    return rep;
}

}  // namespace composa
