// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "composa/baselines.hpp"
#include "composa/bench.hpp"
#include "composa/config.hpp"
#include "composa/curvature.hpp"
#include "composa/geometry.hpp"
#include "composa/solver.hpp"
#include "composa/subgradient.hpp"

using namespace composa;

namespace {

// Pinned tolerances.
constexpr double kC1MaxSeconds = 60.0;
constexpr double kC2CostGap = 1e-5;
constexpr double kC2StepGap = 1e-4;
constexpr double kC2AdmmTol = 1e-10;
constexpr double kC2MaxSeconds = 30.0;
constexpr double kC3MaxDiff = 1e-8;
constexpr std::size_t kC3MaxIter = 10000;
constexpr double kC4Slack = 1e-6;
constexpr double kC4GridStep = 0.01;
constexpr double kC5GradRel = 1e-5;
constexpr double kC5HessRel = 1e-4;
constexpr double kC7Idempotence = 1e-12;
constexpr double kC7Feasibility = 1e-10;
constexpr double kC7DistanceSlack = 1e-9;
constexpr double kC7Orthogonality = 1e-9;
constexpr double kC8MaxRatio = 0.77;
constexpr double kC8FrozenFraction = 0.3;
constexpr double kC10BlockFactor = 1.4;
constexpr double kC10DirectionRel = 1e-6;
constexpr double kC10CostRel = 1e-3;
constexpr double kC12Factor = 2.0;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// ResidualSmall terminations collected for the certificate check.
struct Certified {
    std::shared_ptr<const ProblemSpec> problem;
    Vector x;
    double tol_residual;
    double residual_scale;
    std::string label;
};
std::vector<Certified> g_residual_small;

SolveReport solve_and_record(std::shared_ptr<const ProblemSpec> p, const Vector& x0, const SolverConfig& cfg,
                             const std::string& label) {
    SolveReport r = gsom_solve(*p, x0, cfg);
    if (r.termination == Termination::ResidualSmall) {
        g_residual_small.push_back({p, r.x_final, cfg.tol_residual, 1.0 + std::abs(r.cost_initial), label});
    }
    return r;
}

Config config(const std::string& text) { return Config::parse_string(text, "<acceptance>"); }

std::shared_ptr<const ProblemSpec> share(ProblemSpec p) { return std::make_shared<const ProblemSpec>(std::move(p)); }

Vector gaussian(std::mt19937_64& rng, Index n, double scale) {
    std::normal_distribution<double> d(0.0, scale);
    Vector v(n);
    for (double& x : v) x = d(rng);
    return v;
}

SparseMatrix random_sparse(std::mt19937_64& rng, Index rows, Index cols, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<Triplet> t;
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            if (u(rng) < density) t.push_back({i, j, d(rng)});
    return SparseMatrix::from_triplets(t, rows, cols);
}

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Count of trace entries that fail to strictly decrease the cost.
std::size_t monotone_violations(const SolveReport& r) {
    std::size_t bad = 0;
    double prev = r.cost_initial;
    for (const auto& rec : r.trace) {
        if (!(rec.cost < prev)) ++bad;
        prev = rec.cost;
    }
    return bad;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    const auto t0 = Clock::now();
    Outcome o;
    std::ostringstream d;
    for (double beta : {0.5, 0.9}) {
        auto inst = problem_from_config(config("problem.kind = quadratic_tv\nproblem.grid_n = 32\nproblem.beta = " +
                                               std::to_string(beta) + "\n"));
        auto cost_for = [&](double gamma) {
            SolverConfig cfg;
            cfg.gamma = gamma;
            cfg.max_iter = 50;
            return gsom_solve(*inst.spec, inst.x0, cfg).cost_final;
        };
        const double c0 = cost_for(0.0);
        d << fmt("beta=%.1f: gamma0=%.6f", beta, c0);
        for (double gamma : {500.0, 1000.0, 5000.0}) {
            const double c = cost_for(gamma);
            d << fmt(" g%.0f=%.6f", gamma, c);
            if (!(c < c0)) o.pass = false;
        }
        d << "; ";
    }
    const double secs = seconds_since(t0);
    if (secs >= kC1MaxSeconds) o.pass = false;
    d << fmt("%.1f s", secs);
    o.detail = d.str();
    return o;
}

Outcome criterion2() {
    const auto t0 = Clock::now();
    Outcome o;
    double worst_cost = 0.0, worst_x = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        const Index m = 20 + rng() % 31;
        const Index rows = m + 10;
        const SparseMatrix a = random_sparse(rng, rows, m, 0.3);
        const Vector y = gaussian(rng, rows, 1.0);
        std::vector<io::Edge> edges;
        for (Index e = 0; e < m + m / 2; ++e) {
            const Index i = rng() % m, j = rng() % m;
            if (i != j) edges.emplace_back(i, j);
        }
        auto p = share(build_deconvolution(a, y, 0.1, 0.2, edges));
        const SolveReport g = solve_and_record(p, Vector(m, 0.0), SolverConfig{}, fmt("fused seed %llu", (unsigned long long)seed));
        AdmmConfig ac;
        ac.tol = kC2AdmmTol;
        ac.maxit = 200000;
        const AdmmResult ad = admm_solve(*p, ac);
        const double gap = std::abs(g.cost_final - ad.report.cost_final) / std::max(1.0, std::abs(ad.report.cost_final));
        const double dx = norm2(subtract(g.x_final, ad.report.x_final)) / (1.0 + norm2(ad.report.x_final));
        worst_cost = std::max(worst_cost, gap);
        worst_x = std::max(worst_x, dx);
    }
    const double secs = seconds_since(t0);
    o.pass = worst_cost <= kC2CostGap && worst_x <= kC2StepGap && secs < kC2MaxSeconds;
    o.detail = fmt("10 instances, worst cost gap %.2e, worst |dx|/(1+|x|) %.2e, %.1f s", worst_cost, worst_x, secs);
    return o;
}

Outcome criterion3() {
    Outcome o;
    double worst = 0.0;
    std::size_t most_iters = 0;
    SolverConfig cfg;
    cfg.max_iter = kC3MaxIter;  // optima just outside 1/gamma converge slowly
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(100 + seed);
        const Index m = 1 + rng() % 30;
        const Vector xhat = gaussian(rng, m, 2.0);
        const double alpha = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
        auto p = share(build_prox_instance(xhat, SparseMatrix::identity(m), alpha));
        const SolveReport r = solve_and_record(p, Vector(m, 0.0), cfg, fmt("prox seed %llu", (unsigned long long)seed));
        most_iters = std::max(most_iters, r.iterations);
        if (r.termination != Termination::ResidualSmall) o.pass = false;
        const Vector st = soft_threshold(xhat, alpha);
        worst = std::max(worst, norm_inf(subtract(r.x_final, st)));
    }
    o.pass = o.pass && worst <= kC3MaxDiff;
    o.detail = fmt("20 instances, worst |x - soft_threshold|_inf %.2e, most iterations %zu", worst, most_iters);
    return o;
}

Outcome criterion4() {
    Outcome o;
    double worst = -std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(404);
    for (int k = 0; k < 50; ++k) {
        const Index p = 1 + k % 3;
        const Index m = 2 + rng() % 5;
        SparseMatrix ca = random_sparse(rng, p, m, 0.6);
        const Vector g = gaussian(rng, m, 1.5);
        const double beta = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
        const BoxQpResult qp = solve_min_norm_qp(g, ca, beta, std::nullopt, {});
        const GridQpResult grid = grid_oracle_qp(g, ca, beta, kC4GridStep);
        const double obj = min_norm_qp_objective(g, ca, beta, qp.xi);
        worst = std::max(worst, obj - grid.objective);
    }
    o.pass = worst <= kC4Slack;
    o.detail = fmt("50 instances, worst objective - grid objective %.2e", worst);
    return o;
}

Outcome criterion5() {
    Outcome o;
    std::mt19937_64 rng(505);
    double worst_g = 0.0, worst_h = 0.0;
    int instances = 0, skipped = 0;
    Index quadratic_rows = 0;
    for (double gamma : {1.0, 10.0, 100.0, 1000.0}) {
        int done = 0;
        while (done < 10) {
            const SparseMatrix c = random_sparse(rng, 5, 8, 0.5);
            const Vector x = gaussian(rng, 8, 1.0 / gamma);
            const Vector cx = c.matvec(x);
            double seam = std::numeric_limits<double>::infinity();
            for (double t : cx) seam = std::min(seam, std::abs(std::abs(t) - 1.0 / gamma));
            if (seam < 1e-3 / gamma) {
                ++skipped;
                continue;
            }
            ++done;
            ++instances;
            const Vector grad = huber_penalty_gradient(c, x, gamma);
            Vector fd(8);
            for (Index j = 0; j < 8; ++j) {
                const double h = 1e-6 / gamma;
                Vector xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                fd[j] = (huber_penalty(c, xp, gamma) - huber_penalty(c, xm, gamma)) / (2.0 * h);
            }
            worst_g = std::max(worst_g, norm2(subtract(grad, fd)) / std::max(norm2(grad), 1e-300));

            HuberOperator op(c, x, gamma);
            quadratic_rows += op.mask_count();
            const DenseMatrix hess = op.assembled().to_dense();
            double diff = 0.0, ref = 0.0;
            for (Index j = 0; j < 8; ++j) {
                const double h = 1e-8 / gamma;
                Vector xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                const Vector col =
                    subtract(huber_penalty_gradient(c, xp, gamma), huber_penalty_gradient(c, xm, gamma));
                for (Index i = 0; i < 8; ++i) {
                    const double e = col[i] / (2.0 * h) - hess(i, j);
                    diff += e * e;
                    ref += hess(i, j) * hess(i, j);
                }
            }
            worst_h = std::max(worst_h, std::sqrt(diff) / std::max(std::sqrt(ref), gamma * 1e-12));
        }
    }
    o.pass = worst_g <= kC5GradRel && worst_h <= kC5HessRel && quadratic_rows > 0;
    o.detail = fmt("%d instances (gamma 1..1000, %d near-seam draws skipped, %zu quadratic rows), "
                   "worst grad rel %.2e, worst Hessian rel %.2e",
                   instances, skipped, quadratic_rows, worst_g, worst_h);
    return o;
}

Outcome criterion6() {
    Outcome o;
    std::ostringstream d;
    std::size_t violations = 0, runs = 0, iterations = 0;
    auto run = [&](const std::string& label, const std::string& text) {
        const ProblemInstance inst = problem_from_config(config(text));
        SolverConfig cfg = solver_config_from(config(text));
        const SolveReport r = solve_and_record(inst.spec, inst.x0, cfg, label);
        const std::size_t v = monotone_violations(r);
        violations += v;
        iterations += r.iterations;
        ++runs;
        if (std::abs(r.cost_final - eval_cost(*inst.spec, r.x_final)) > 1e-12 * (1.0 + std::abs(r.cost_final))) {
            ++violations;
        }
        if (v > 0) d << label << " has " << v << " violations; ";
    };
    for (double beta : {0.5, 0.9})
        run(fmt("quadratic_tv b=%.1f", beta),
            fmt("problem.kind = quadratic_tv\nproblem.grid_n = 32\nproblem.beta = %g\n", beta));
    run("deconvolution", "problem.kind = deconvolution\nproblem.grid_n = 32\n");
    for (double a : {0.3, 0.9})
        for (double beta : {0.1, 0.5})
            run(fmt("cauchy a=%.1f b=%.1f", a, beta),
                fmt("problem.kind = cauchy\nproblem.grid_n = 32\nproblem.a = %g\nproblem.beta = %g\n", a, beta));
    run("graph_trend", "problem.kind = graph_trend\n");
    run("graph_trend gamma=0", "problem.kind = graph_trend\nsolver.gamma = 0\n");
    run("prox", "problem.kind = prox\nproblem.xhat = [3, -0.5, 1.2]\nproblem.penalty = difference\n");
    o.pass = violations == 0;
    o.detail = d.str() + fmt("%zu runs, %zu iterations, %zu violations", runs, iterations, violations);
    return o;
}

// Random combination of a null-space basis of cs from a dense LU.
Vector random_feasible(std::mt19937_64& rng, const SparseMatrix& cs) {
    Eigen::MatrixXd a(cs.rows(), cs.cols());
    for (Index i = 0; i < cs.rows(); ++i)
        for (Index j = 0; j < cs.cols(); ++j) a(i, j) = cs.coeff(i, j);
    const Eigen::MatrixXd basis = Eigen::FullPivLU<Eigen::MatrixXd>(a).kernel();
    Vector out(cs.cols(), 0.0);
    if (basis.cols() == 1 && basis.norm() == 0.0) return out;
    std::normal_distribution<double> d(0.0, 3.0);
    for (Index k = 0; k < static_cast<Index>(basis.cols()); ++k) {
        const double w = d(rng);
        for (Index j = 0; j < cs.cols(); ++j) out[j] += w * basis(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    }
    return out;
}

Outcome criterion7() {
    Outcome o;
    std::mt19937_64 rng(707);
    double worst_idem = 0.0, worst_feas = 0.0, worst_dist = 0.0, worst_orth = 0.0;
    int rank_deficient = 0;
    for (int k = 0; k < 100; ++k) {
        const Index m = 4 + rng() % 12;
        const Index rows = 1 + rng() % (m - 1);
        SparseMatrix cs = random_sparse(rng, rows, m, 0.5);
        if (k % 25 == 0) {
            cs = vstack(cs, cs.select_rows(std::vector<Index>{0}));
            ++rank_deficient;
        }
        const Vector x = gaussian(rng, m, 3.0);
        const double scale = 1.0 + norm_inf(x);
        const Projection pr = project_onto_subspace(x, cs);
        worst_feas = std::max(worst_feas, norm_inf(cs.matvec(pr.x)) / scale);
        worst_idem = std::max(worst_idem, norm_inf(subtract(project_onto_subspace(pr.x, cs).x, pr.x)) / scale);
        const double dist = norm2(subtract(pr.x, x));
        for (int j = 0; j < 100; ++j) {
            Vector z = random_feasible(rng, cs);
            if (j % 2) {  // nearby feasible points
                for (Index i = 0; i < m; ++i) z[i] = pr.x[i] + 0.01 * z[i];
            }
            worst_dist = std::max(worst_dist, dist - norm2(subtract(z, x)));
        }
        worst_orth = std::max(worst_orth, std::abs(dot(pr.x, subtract(x, pr.x))) / std::max(dot(x, x), 1e-300));
    }
    o.pass = worst_idem <= kC7Idempotence && worst_feas <= kC7Feasibility && worst_dist <= kC7DistanceSlack &&
             worst_orth <= kC7Orthogonality;
    o.detail = fmt("100 instances (%d rank-deficient): idempotence %.1e, feasibility %.1e, "
                   "distance excess %.1e, orthogonality %.1e",
                   rank_deficient, worst_idem, worst_feas, worst_dist, worst_orth);
    return o;
}

Outcome criterion8() {
    Outcome o;
    const Config cfg = config(fmt("problem.kind = quadratic_tv\nproblem.grid_n = 32\nbench.betas = [0.5, 0.9]\n"
                                  "bench.iters = 50\nbench.frozen_fraction = %g\n",
                                  kC8FrozenFraction));
    const ActiveSetResult r = bench_active_set(cfg, 1);
    const double red = median(r.reduced_ms), full = median(r.full_ms);
    const double ratio = red / full;
    o.pass = r.eligible > 0 && ratio <= kC8MaxRatio;
    o.detail = fmt("m=%zu, %zu of %zu iterations eligible, median reduced %.3f ms vs full %.3f ms, ratio %.3f",
                   r.dim, r.eligible, r.iterations, red, full, ratio);
    return o;
}

Outcome criterion9() {
    Outcome o;
    const Config cfg = config("problem.kind = quadratic_tv\nbench.sizes = [40, 50, 60]\n");
    const LinsolveResult r = bench_linsolve(cfg, 5);
    std::ostringstream d;
    d << "median seconds";
    for (std::size_t k = 0; k < kLinsolveMethods.size(); ++k) {
        d << " | " << kLinsolveMethods[k] << ":";
        for (std::size_t s = 0; s < r.dims.size(); ++s) d << fmt(" m=%zu %.4f", r.dims[s], median(r.ms[k][s]) / 1e3);
    }
    const std::size_t last = r.dims.size() - 1;
    const double dense = median(r.ms[0][last]), pcg = median(r.ms[2][last]);
    o.pass = r.dims[last] == 3600 && pcg < dense;
    o.detail = d.str();
    return o;
}

Outcome criterion10() {
    Outcome o;
    const Config cfg = config("problem.kind = deconvolution\nproblem.grid_n = 103\nlinsolve.partitions = 4\n"
                              "linsolve.overlap = 0.2\nbench.iters = 20\n");
    const BlockJacobiResult r = bench_block_jacobi(cfg);
    const double bound = static_cast<double>(r.dim) / 4.0 * kC10BlockFactor + 1.0;
    const double cost_rel = std::abs(r.cost_block - r.cost_full) / std::max(1.0, std::abs(r.cost_full));
    o.pass = static_cast<double>(r.max_block_dim) <= bound && r.direction_rel_diff <= kC10DirectionRel &&
             cost_rel <= kC10CostRel;
    o.detail = fmt("m=%zu, max block %zu (bound %.2f), direction rel %.2e, cost rel %.2e, factor nnz %zu vs %zu",
                   r.dim, r.max_block_dim, bound, r.direction_rel_diff, cost_rel, r.factor_nnz_full,
                   r.factor_nnz_blocks);
    return o;
}

Outcome criterion11() {
    Outcome o;
    const std::string text =
        "problem.kind = graph_trend\nproblem.graph_rows = 20\nproblem.graph_cols = 20\nproblem.noise = 0.1\n"
        "problem.beta1 = 1\nproblem.beta2 = 0.1\nsolver.gamma = 0\nsolver.max_iter = 50\nadmm.maxit = 50\n";
    const Config cfg = config(text);
    const ProblemInstance inst = problem_from_config(cfg);
    const SolveReport g = gsom_solve(*inst.spec, inst.x0, solver_config_from(cfg));
    const AdmmResult a = admm_solve(*inst.spec, admm_config_from(cfg));
    o.pass = g.cost_final <= a.report.cost_final;
    o.detail = fmt("GSOM %.6f after %zu iterations (%s), ADMM %.6f after %zu iterations", g.cost_final, g.iterations,
                   to_string(g.termination).c_str(), a.report.cost_final, a.report.iterations);
    return o;
}

Outcome criterion12() {
    Outcome o;
    double worst = 0.0, worst_abs = 0.0;
    std::string worst_label;
    for (const auto& c : g_residual_small) {
        auto part = classify_indices(c.problem->penalty(), c.x, default_tol_act(c.x));
        const SubgradientState fresh = min_norm_subgradient(*c.problem, c.x, std::move(part));
        // the stop test compares against tol_residual * (1 + |phi(x0)|)
        const double ratio = fresh.residual_norm / (c.tol_residual * c.residual_scale);
        worst_abs = std::max(worst_abs, fresh.residual_norm / c.tol_residual);
        if (ratio > worst) {
            worst = ratio;
            worst_label = c.label;
        }
    }
    o.pass = !g_residual_small.empty() && worst <= kC12Factor;
    o.detail = fmt("%zu ResidualSmall runs, worst fresh residual %.3g x stopping threshold (%s); "
                   "unscaled worst %.3g x tol_residual",
                   g_residual_small.size(), worst, worst_label.c_str(), worst_abs);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, criterion1}, {2, criterion2},   {3, criterion3},   {4, criterion4},
        {5, criterion5}, {6, criterion6},   {7, criterion7},   {8, criterion8},
        {9, criterion9}, {10, criterion10}, {11, criterion11}, {12, criterion12}};
    int failed = 0;
    for (const auto& [id, run] : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail
                  << fmt(" [%.1f s]", seconds_since(t0)) << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
