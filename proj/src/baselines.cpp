#include "composa/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "composa/error.hpp"
#include "composa/sparse_cholesky.hpp"
#include "composa/subgradient.hpp"

namespace composa {

namespace {
using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
}  // namespace

Vector soft_threshold(std::span<const double> v, double t) {
    if (t < 0.0) throw Error("soft_threshold: threshold must be non-negative");
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]) - t;
        out[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
    }
    return out;
}

AdmmResult admm_solve(const ProblemSpec& p, const AdmmConfig& cfg) {
    const auto q = p.smooth().quadratic();
    if (!q) throw NonQuadraticSmoothPart("admm_solve: smooth part '" + p.smooth().name() + "' is not quadratic");
    if (!(cfg.rho > 0.0)) throw ConfigError("admm_solve: rho must be positive");
    const auto t_start = Clock::now();

    const SparseMatrix& c = p.penalty();
    const SparseMatrix& h = *q->hessian;
    const Index m = p.dim();
    const Index n = c.rows();
    const SparseMatrix ctc = multiply(c.transpose(), c);
    const double beta = p.beta();

    AdmmResult res;
    double rho = cfg.rho;
    std::optional<SparseCholesky> chol;
    auto refactor = [&]() {
        chol = SparseCholesky::factor(add(h, ctc, 1.0, rho));
        if (!chol) throw Error("admm_solve: H + rho C^T C is not positive definite");
    };
    refactor();

    Vector x(m, 0.0), z(n, 0.0), u(n, 0.0), rhs(m), cx(n), w(n);
    SolveReport& rep = res.report;
    rep.method = "admm";
    rep.cost_initial = eval_cost(p, x);
    double r_norm = 0.0, s_norm = 0.0;
    rep.termination = Termination::MaxIter;

    for (std::size_t k = 0; k < cfg.maxit; ++k) {
        const auto t_iter = Clock::now();
        for (Index i = 0; i < n; ++i) w[i] = z[i] - u[i];
        const Vector ctw = c.matvec_t(w);
        for (Index j = 0; j < m; ++j) rhs[j] = q->linear[j] + rho * ctw[j];
        x = chol->solve(rhs);

        c.matvec(x, cx);
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = cx[i] + u[i];
        Vector z_new = soft_threshold(v, beta / rho);
        Vector dz = subtract(z_new, z);
        z = std::move(z_new);
        for (Index i = 0; i < n; ++i) u[i] += cx[i] - z[i];

        r_norm = 0.0;
        for (Index i = 0; i < n; ++i) r_norm += (cx[i] - z[i]) * (cx[i] - z[i]);
        r_norm = std::sqrt(r_norm);
        s_norm = rho * norm2(c.matvec_t(dz));

        IterationRecord rec;
        rec.iter = k + 1;
        rec.cost = eval_cost(p, x);
        rec.residual = std::max(r_norm, s_norm);
        rec.step = 1.0;
        rec.wall_ms = ms_since(t_iter);
        rep.trace.push_back(rec);
        rep.iterations = k + 1;

        const double eps_pri = cfg.tol * (1.0 + std::max(norm2(cx), norm2(z)));
        const double eps_dual = cfg.tol * (1.0 + rho * norm2(c.matvec_t(u)));
        if (r_norm <= eps_pri && s_norm <= eps_dual) {
            rep.termination = Termination::ResidualSmall;
            break;
        }

        if (cfg.residual_balancing && n > 0) {
            double scale = 1.0;
            if (r_norm > cfg.balance_ratio * s_norm) {
                scale = cfg.balance_factor;
            } else if (s_norm > cfg.balance_ratio * r_norm) {
                scale = 1.0 / cfg.balance_factor;
            }
            if (scale != 1.0) {
                rho *= scale;
                for (double& ui : u) ui /= scale;
                refactor();
            }
        }
    }

    rep.x_final = x;
    rep.cost_final = eval_cost(p, x);
    rep.residual_final = std::max(r_norm, s_norm);
    rep.wall_ms = ms_since(t_start);
    res.z = std::move(z);
    res.u = std::move(u);
    res.rho = rho;
    res.primal_residual = r_norm;
    res.dual_residual = s_norm;
    return res;
}

Vector admm_multiplier(const AdmmResult& r, double beta) {
    Vector xi(r.u.size());
    for (Index i = 0; i < xi.size(); ++i) xi[i] = std::clamp(r.rho * r.u[i] / beta, -1.0, 1.0);
    return xi;
}

GridQpResult grid_oracle_qp(std::span<const double> g, const SparseMatrix& c_active, double beta, double step) {
    const Index p = c_active.rows();
    if (p > 3) throw Error("grid_oracle_qp: at most 3 active rows supported");
    if (!(step > 0.0)) throw Error("grid_oracle_qp: step must be positive");
    const long k = static_cast<long>(std::floor(2.0 / step + 1e-9));
    auto coord = [&](long i) { return std::min(1.0, -1.0 + static_cast<double>(i) * step); };

    GridQpResult best;
    best.objective = std::numeric_limits<double>::infinity();
    Vector xi(p, 0.0);
    std::vector<long> idx(p, 0);
    while (true) {
        for (Index j = 0; j < p; ++j) xi[j] = coord(idx[j]);
        const double obj = min_norm_qp_objective(g, c_active, beta, xi);
        if (obj < best.objective) {
            best.objective = obj;
            best.xi = xi;
        }
        Index j = 0;
        while (j < p && ++idx[j] > k) idx[j++] = 0;
        if (j == p) break;
    }
    return best;
}

GridPhiResult grid_oracle_phi(const ProblemSpec& p, double lo, double hi, double step) {
    const Index m = p.dim();
    if (m > 2) throw Error("grid_oracle_phi: at most 2 variables supported");
    if (!(step > 0.0) || !(hi > lo)) throw Error("grid_oracle_phi: invalid box or step");

    GridPhiResult best;
    best.cost = std::numeric_limits<double>::infinity();
    auto scan = [&](const Vector& lower, const Vector& upper, double h) {
        std::vector<long> counts(m), idx(m, 0);
        for (Index j = 0; j < m; ++j) counts[j] = static_cast<long>(std::floor((upper[j] - lower[j]) / h + 1e-9));
        Vector x(m);
        while (true) {
            for (Index j = 0; j < m; ++j) x[j] = lower[j] + static_cast<double>(idx[j]) * h;
            const double cst = eval_cost(p, x);
            if (cst < best.cost) {
                best.cost = cst;
                best.x = x;
            }
            Index j = 0;
            while (j < m && ++idx[j] > counts[j]) idx[j++] = 0;
            if (j == m) break;
        }
    };
    scan(Vector(m, lo), Vector(m, hi), step);
    Vector lower(m), upper(m);
    for (Index j = 0; j < m; ++j) {
        lower[j] = std::max(lo, best.x[j] - step);
        upper[j] = std::min(hi, best.x[j] + step);
    }
    scan(lower, upper, step / 100.0);
    return best;
}

}  // namespace composa
