#include "composa/subgradient.hpp"

#include <algorithm>
#include <cmath>

#include "composa/error.hpp"

namespace composa {
namespace {

void project_box(std::span<double> v) {
    for (double& e : v) e = std::clamp(e, -1.0, 1.0);
}

// r = g + beta * C_A^T xi
void qp_residual(std::span<const double> g, const SparseMatrix& ca, double beta, std::span<const double> xi,
                 std::span<double> r) {
    ca.matvec_t(xi, r);
    for (Index i = 0; i < r.size(); ++i) r[i] = g[i] + beta * r[i];
}

}  // namespace

double default_tol_act(std::span<const double> x) { return 1e-8 * (1.0 + norm_inf(x)); }

IndexPartition classify_indices(const SparseMatrix& c, std::span<const double> x, double tol_act) {
    if (x.size() != c.cols()) throw DimensionError("classify_indices: x has wrong length");
    if (tol_act < 0.0) throw Error("classify_indices: tol_act must be non-negative");
    IndexPartition part;
    part.tol_act = tol_act;
    part.sign.resize(c.rows());
    for (Index i = 0; i < c.rows(); ++i) {
        const double t = c.row_dot(i, x);
        if (t > tol_act) {
            part.pos.push_back(i);
            part.sign[i] = 1;
        } else if (t < -tol_act) {
            part.neg.push_back(i);
            part.sign[i] = -1;
        } else {
            part.act.push_back(i);
            part.sign[i] = 0;
        }
    }
    return part;
}

Vector tilde_grad(const SparseMatrix& c, double beta, std::span<const double> grad, const IndexPartition& part) {
    Vector s(c.rows());
    for (Index i = 0; i < c.rows(); ++i) s[i] = static_cast<double>(part.sign[i]);
    Vector out = c.matvec_t(s);
    for (Index j = 0; j < out.size(); ++j) out[j] = grad[j] + beta * out[j];
    return out;
}

Vector tilde_grad(const ProblemSpec& p, std::span<const double> x, const IndexPartition& part) {
    const Vector g = p.gradient(x);
    return tilde_grad(p.penalty(), p.beta(), g, part);
}

double min_norm_qp_objective(std::span<const double> g, const SparseMatrix& c_active, double beta,
                             std::span<const double> xi) {
    Vector r(g.size());
    qp_residual(g, c_active, beta, xi, r);
    return 0.5 * dot(r, r);
}

BoxQpResult solve_min_norm_qp(std::span<const double> g, const SparseMatrix& ca, double beta,
                              std::optional<std::span<const double>> warm_start, const MinSubOptions& opts) {
    const Index p = ca.rows();
    const Index m = g.size();
    if (ca.cols() != m) throw DimensionError("solve_min_norm_qp: C_A and gradient do not conform");

    BoxQpResult res;
    Vector zero(p, 0.0);
    res.xi = zero;
    res.objective = 0.5 * dot(g, g);
    if (p == 0) return res;

    if (warm_start) {
        if (warm_start->size() != p) throw DimensionError("solve_min_norm_qp: warm start has wrong length");
        Vector w(warm_start->begin(), warm_start->end());
        project_box(w);
        const double qw = min_norm_qp_objective(g, ca, beta, w);
        if (qw <= res.objective) {
            res.xi = std::move(w);
            res.objective = qw;
        }
    }

    // Lipschitz constant of the QP gradient: beta^2 * lambda_max(C_A C_A^T).
    Vector tmp(m);
    const double lam = op_norm_estimate(
        [&](std::span<const double> v, std::span<double> out) {
            ca.matvec_t(v, tmp);
            ca.matvec(tmp, out);
        },
        p);
    double lip = 1.1 * beta * beta * lam;
    if (!(lip > 0.0)) return res;  // C_A vanishes: every xi is optimal
    double tau = 1.0 / lip;

    Vector x = res.xi;
    Vector y = x;
    Vector x_new(p), grad(p), r(m), probe(p);
    double qx = res.objective;
    double t = 1.0;
    bool momentum = false;

    auto gradient_at = [&](std::span<const double> point, std::span<double> out) {
        qp_residual(g, ca, beta, point, r);
        ca.matvec(r, out);
        for (double& e : out) e *= beta;
    };
    auto fixed_point_residual = [&](std::span<const double> point) {
        gradient_at(point, grad);
        double fp = 0.0;
        for (Index i = 0; i < p; ++i) {
            const double proj = std::clamp(point[i] - tau * grad[i], -1.0, 1.0);
            fp = std::max(fp, std::abs(point[i] - proj));
        }
        return fp;
    };

    res.fixed_point_residual = fixed_point_residual(x);
    res.converged = res.fixed_point_residual <= opts.tol_qp;
    std::size_t it = 0;
    while (!res.converged && it < opts.maxit_qp) {
        ++it;
        gradient_at(y, grad);
        for (Index i = 0; i < p; ++i) x_new[i] = std::clamp(y[i] - tau * grad[i], -1.0, 1.0);
        const double q_new = min_norm_qp_objective(g, ca, beta, x_new);

        if (q_new > qx + 1e-13 * qx) {
            if (momentum) {
                // adaptive restart
                y = x;
                t = 1.0;
                momentum = false;
            } else {
                // plain projected step went uphill: the estimate of L was low
                lip *= 2.0;
                tau = 1.0 / lip;
            }
            continue;
        }

        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double coef = (t - 1.0) / t_new;
        for (Index i = 0; i < p; ++i) y[i] = x_new[i] + coef * (x_new[i] - x[i]);
        momentum = coef > 0.0;
        x.swap(x_new);
        qx = q_new;
        t = t_new;

        res.fixed_point_residual = fixed_point_residual(x);
        res.converged = res.fixed_point_residual <= opts.tol_qp;
    }
    res.iterations = it;
    if (qx <= res.objective) {
        res.xi = x;
        res.objective = qx;
    } else {
        res.fixed_point_residual = fixed_point_residual(res.xi);
        res.converged = res.fixed_point_residual <= opts.tol_qp;
    }
    return res;
}

SubgradientState min_norm_subgradient(const ProblemSpec& p, Vector gradient, IndexPartition part,
                                      std::optional<std::span<const double>> warm_start,
                                      const MinSubOptions& opts) {
    const SparseMatrix& c = p.penalty();
    if (part.sign.size() != c.rows()) throw DimensionError("min_norm_subgradient: partition does not match C");
    SubgradientState st;
    st.gradient = std::move(gradient);
    st.xi.assign(c.rows(), 0.0);
    for (Index i : part.pos) st.xi[i] = 1.0;
    for (Index i : part.neg) st.xi[i] = -1.0;

    if (!part.act.empty()) {
        const Vector tg = tilde_grad(c, p.beta(), st.gradient, part);
        const SparseMatrix ca = c.select_rows(part.act);
        const BoxQpResult qp = solve_min_norm_qp(tg, ca, p.beta(), warm_start, opts);
        for (Index k = 0; k < part.act.size(); ++k) st.xi[part.act[k]] = qp.xi[k];
        st.qp_iters = qp.iterations;
        st.qp_converged = qp.converged;
    }

    st.residual = c.matvec_t(st.xi);
    for (Index j = 0; j < st.residual.size(); ++j) st.residual[j] = st.gradient[j] + p.beta() * st.residual[j];
    st.residual_norm = norm2(st.residual);
    st.partition = std::move(part);
    return st;
}

SubgradientState min_norm_subgradient(const ProblemSpec& p, std::span<const double> x, IndexPartition part,
                                      std::optional<std::span<const double>> warm_start,
                                      const MinSubOptions& opts) {
    return min_norm_subgradient(p, p.gradient(x), std::move(part), warm_start, opts);
}

}  // namespace composa
