#include "composa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "composa/error.hpp"
#include "composa/sparse_cholesky.hpp"

namespace composa {
namespace {

int sign_tol(double t, double tol) {
    if (t > tol) return 1;
    if (t < -tol) return -1;
    return 0;
}

int sign_of(double t) { return (t > 0.0) - (t < 0.0); }

// Solver for (Cs Cs^T [+ eps I]) y = rhs, dense or sparse.
class GramSolver {
public:
    GramSolver(const SparseMatrix& cs, double eps_reg, Index dense_budget) {
        if (cs.rows() <= dense_budget) {
            DenseMatrix g = gram_small(cs);
            dense_ = DenseCholesky::factor(g);
            if (!dense_) {
                const double eps = eps_reg * std::max(g.max_diagonal(), 1.0);
                for (Index i = 0; i < g.rows(); ++i) g(i, i) += eps;
                dense_ = DenseCholesky::factor(g);
                regularized_ = true;
            }
            ok_ = dense_.has_value();
        } else {
            SparseMatrix g = gram_sparse(cs);
            sparse_ = SparseCholesky::factor(g);
            if (!sparse_) {
                double max_diag = 1.0;
                for (double v : g.diagonal_values()) max_diag = std::max(max_diag, v);
                sparse_ = SparseCholesky::factor(add(g, SparseMatrix::identity(g.rows(), eps_reg * max_diag)));
                regularized_ = true;
            }
            ok_ = sparse_.has_value();
        }
    }

    bool ok() const { return ok_; }
    bool regularized() const { return regularized_; }
    Vector solve(std::span<const double> b) const { return dense_ ? dense_->solve(b) : sparse_->solve(b); }

private:
    std::optional<DenseCholesky> dense_;
    std::optional<SparseCholesky> sparse_;
    bool ok_ = false;
    bool regularized_ = false;
};

}  // namespace

SignChangeSet sign_change_set(const SparseMatrix& c, std::span<const double> x, std::span<const double> xi,
                              std::span<const double> trial, double tol_act) {
    if (x.size() != c.cols() || trial.size() != c.cols()) throw DimensionError("sign_change_set: wrong length");
    if (xi.size() != c.rows()) throw DimensionError("sign_change_set: multiplier has wrong length");
    SignChangeSet s;
    s.trial_x.assign(trial.begin(), trial.end());
    for (Index i = 0; i < c.rows(); ++i) {
        const double cx = c.row_dot(i, x);
        const double ct = c.row_dot(i, trial);
        if (std::abs(cx) > tol_act) {
            if (sign_tol(ct, tol_act) != sign_tol(cx, tol_act)) s.indices.push_back(i);
        } else if (static_cast<double>(sign_of(xi[i])) * (ct - cx) <= 0.0) {
            s.indices.push_back(i);
        }
    }
    s.cs = c.select_rows(s.indices);
    return s;
}

Projection project_onto_subspace(std::span<const double> x, const SparseMatrix& cs, double eps_reg,
                                 Index dense_budget) {
    if (x.size() != cs.cols()) throw DimensionError("project_onto_subspace: x has wrong length");
    Projection out;
    out.x.assign(x.begin(), x.end());
    if (cs.rows() == 0) return out;

    GramSolver solver(cs, eps_reg, dense_budget);
    if (!solver.ok()) throw Error("project_onto_subspace: regularized Gram factorization failed");
    out.regularized = solver.regularized();
    out.multiplier.assign(cs.rows(), 0.0);

    // Two refinement passes recover feasibility lost to roundoff or to the
    // regularization shift.
    const double target = 1e-12 * (1.0 + norm_inf(x));
    Vector r = cs.matvec(out.x);
    for (int pass = 0; pass < 3; ++pass) {
        const Vector y = solver.solve(r);
        const Vector cty = cs.matvec_t(y);
        axpy(1.0, y, out.multiplier);
        axpy(-1.0, cty, out.x);
        r = cs.matvec(out.x);
        if (norm_inf(r) <= target) break;
    }
    return out;
}

std::string to_string(SlopeKind kind) { return kind == SlopeKind::MinNorm ? "minnorm" : "tilde"; }

SlopeKind parse_slope_kind(const std::string& name) {
    if (name == "minnorm") return SlopeKind::MinNorm;
    if (name == "tilde") return SlopeKind::Tilde;
    throw ConfigError("unknown line-search slope '" + name + "' (expected minnorm or tilde)");
}

std::string to_string(InteriorPinning mode) {
    switch (mode) {
        case InteriorPinning::Off: return "off";
        case InteriorPinning::Fallback: return "fallback";
        case InteriorPinning::Always: return "always";
    }
    return "unknown";
}

InteriorPinning parse_interior_pinning(const std::string& name) {
    if (name == "off") return InteriorPinning::Off;
    if (name == "fallback") return InteriorPinning::Fallback;
    if (name == "always") return InteriorPinning::Always;
    throw ConfigError("unknown interior pinning mode '" + name + "' (expected off, fallback or always)");
}

SignChangeSet pin_interior_rows(const SparseMatrix& c, const SignChangeSet& s, const IndexPartition& part,
                                std::span<const double> xi, double margin) {
    SignChangeSet out;
    out.trial_x = s.trial_x;
    std::vector<std::uint8_t> in(c.rows(), 0);
    for (Index i : s.indices) in[i] = 1;
    for (Index i : part.act) {
        if (std::abs(xi[i]) < 1.0 - margin) in[i] = 1;
    }
    for (Index i = 0; i < c.rows(); ++i) {
        if (in[i]) out.indices.push_back(i);
    }
    out.cs = c.select_rows(out.indices);
    return out;
}

LineSearchResult projected_linesearch(const ProblemSpec& p, std::span<const double> x, double cost_x,
                                      std::span<const double> d, const SubgradientState& state,
                                      const LineSearchConfig& cfg) {
    const Index m = p.dim();
    if (x.size() != m || d.size() != m) throw DimensionError("projected_linesearch: wrong length");
    const SparseMatrix& c = p.penalty();

    Vector slope_vec;
    if (cfg.slope == SlopeKind::MinNorm) {
        slope_vec = state.residual;
    } else {
        slope_vec = tilde_grad(c, p.beta(), state.gradient, state.partition);
    }

    LineSearchResult best;
    best.cost_next = std::numeric_limits<double>::infinity();

    // Evaluates one candidate; returns true when it passes the decrease test.
    auto evaluate = [&](SignChangeSet& sc, double s, bool pinned) {
        Projection proj = project_onto_subspace(sc.trial_x, sc.cs, cfg.eps_reg);
        double cost = std::numeric_limits<double>::infinity();
        try {
            cost = eval_cost(p, proj.x);
        } catch (const EvaluationError&) {
            // treated as a rejected trial
        }
        const Vector step = subtract(proj.x, x);
        const double slope = std::min(dot(slope_vec, step), 0.0);
        const bool accept = cost < cost_x + cfg.sigma * slope && cost < cost_x;
        if (accept || cost < best.cost_next) {
            best.step = s;
            best.x_next = std::move(proj.x);
            best.cost_next = cost;
            best.sign_changes = std::move(sc.indices);
            best.pinned = pinned;
        }
        return accept;
    };

    Vector trial(m);
    double s = 1.0;
    for (std::size_t t = 0; t <= cfg.max_backtracks && s >= cfg.s_min; ++t, s *= 0.5) {
        for (Index j = 0; j < m; ++j) trial[j] = x[j] + s * d[j];
        SignChangeSet sc = sign_change_set(c, x, state.xi, trial, state.partition.tol_act);
        best.trials = t + 1;
        bool accept = false;
        if (cfg.pinning == InteriorPinning::Always) {
            SignChangeSet pinned = pin_interior_rows(c, sc, state.partition, state.xi, cfg.interior_margin);
            accept = evaluate(pinned, s, true);
        } else {
            const std::size_t base = sc.indices.size();
            SignChangeSet pinned;
            if (cfg.pinning == InteriorPinning::Fallback) {
                pinned = pin_interior_rows(c, sc, state.partition, state.xi, cfg.interior_margin);
            }
            accept = evaluate(sc, s, false);
            if (!accept && cfg.pinning == InteriorPinning::Fallback && pinned.indices.size() > base) {
                accept = evaluate(pinned, s, true);
            }
        }
        if (accept) {
            best.decreased = true;
            return best;
        }
    }
    best.stalled = true;
    best.decreased = best.cost_next < cost_x;
    if (best.x_next.empty()) {
        best.x_next.assign(x.begin(), x.end());
        best.cost_next = cost_x;
    }
    return best;
}

}  // namespace composa
