#include "composa/direction.hpp"

#include <algorithm>
#include <cmath>

#include "composa/error.hpp"
#include "composa/sparse_cholesky.hpp"

namespace composa {

double default_eps_act(std::span<const double> residual) { return 1e-6 * (1.0 + norm_inf(residual)); }

ActiveSplit identify_active(const SparseMatrix& c, const IndexPartition& part, std::span<const double> residual,
                            double eps_act) {
    if (residual.size() != c.cols()) throw DimensionError("identify_active: residual has wrong length");
    std::vector<std::uint8_t> frozen(c.cols(), 0);
    for (Index i : part.act) {
        for (Index j : c.row_cols(i)) {
            if (std::abs(residual[j]) <= eps_act) frozen[j] = 1;
        }
    }
    ActiveSplit split;
    split.eps_act = eps_act;
    for (Index j = 0; j < c.cols(); ++j) (frozen[j] ? split.frozen : split.free).push_back(j);
    return split;
}

std::string to_string(LinearSolverKind kind) {
    switch (kind) {
        case LinearSolverKind::Auto: return "auto";
        case LinearSolverKind::Direct: return "direct";
        case LinearSolverKind::Pcg: return "pcg";
        case LinearSolverKind::BlockJacobi: return "block_jacobi";
    }
    return "unknown";
}

LinearSolverKind parse_linear_solver_kind(const std::string& name) {
    if (name == "auto") return LinearSolverKind::Auto;
    if (name == "direct") return LinearSolverKind::Direct;
    if (name == "pcg") return LinearSolverKind::Pcg;
    if (name == "block_jacobi") return LinearSolverKind::BlockJacobi;
    throw ConfigError("unknown linear solver '" + name + "' (expected auto, direct, pcg or block_jacobi)");
}

namespace {

double relative_residual(const LinearOperator& op, std::span<const double> d, std::span<const double> rhs_neg) {
    Vector md(d.size());
    op(d, md);
    for (Index i = 0; i < md.size(); ++i) md[i] += rhs_neg[i];
    return norm2(md) / (1.0 + norm2(rhs_neg));
}

Vector direct_solve(const SparseMatrix& a, std::span<const double> residual) {
    auto chol = SparseCholesky::factor(a);
    if (!chol) throw Error("direction: factorization of the system matrix failed (matrix not positive definite)");
    Vector rhs(residual.size());
    for (Index i = 0; i < rhs.size(); ++i) rhs[i] = -residual[i];
    return chol->solve(rhs);
}

}  // namespace

DirectionResult solve_direction(const SystemOperator& m, std::span<const double> residual,
                                const ActiveSplit* split, const LinearSolverConfig& cfg) {
    const Index n = m.dim();
    if (residual.size() != n) throw DimensionError("solve_direction: residual has wrong length");

    DirectionResult res;
    res.d.assign(n, 0.0);

    // Restrict to the free coordinates when a split is given.
    std::vector<Index> free;
    const bool reduced = split != nullptr;
    if (reduced) {
        free = split->free;
        res.reduced = true;
        res.frozen_count = split->frozen.size();
    }
    const Index k = reduced ? free.size() : n;
    Vector v(k);
    for (Index i = 0; i < k; ++i) v[i] = residual[reduced ? free[i] : i];
    if (k == 0) return res;

    const bool use_matrix = !m.prefers_operator();
    std::optional<SparseMatrix> sub;
    const SparseMatrix* mat = nullptr;
    if (use_matrix) {
        if (reduced) {
            sub = principal_submatrix(m.assembled(), free);
            mat = &*sub;
        } else {
            mat = &m.assembled();
        }
    }

    Vector pad(n), out(n);
    LinearOperator op;
    Vector diag;
    if (mat) {
        op = as_operator(*mat);
        diag = mat->diagonal_values();
    } else if (reduced) {
        op = [&, free](std::span<const double> x, std::span<double> y) {
            std::fill(pad.begin(), pad.end(), 0.0);
            for (Index i = 0; i < free.size(); ++i) pad[free[i]] = x[i];
            m.apply(pad, out);
            for (Index i = 0; i < free.size(); ++i) y[i] = out[free[i]];
        };
        const Vector full = m.diagonal();
        diag.resize(k);
        for (Index i = 0; i < k; ++i) diag[i] = full[free[i]];
    } else {
        op = [&m](std::span<const double> x, std::span<double> y) { m.apply(x, y); };
        diag = m.diagonal();
    }

    LinearSolverKind kind = cfg.kind;
    if (kind == LinearSolverKind::Auto) {
        kind = (mat && k <= cfg.direct_max_dim) ? LinearSolverKind::Direct : LinearSolverKind::Pcg;
    }
    if (kind == LinearSolverKind::BlockJacobi && !mat) kind = LinearSolverKind::Pcg;

    Vector d;
    auto fallback_direct = [&]() {
        const SparseMatrix* a = mat;
        std::optional<SparseMatrix> built;
        if (!a) {
            built = reduced ? principal_submatrix(m.assembled(), free) : m.assembled();
            a = &*built;
        }
        d = direct_solve(*a, v);
        res.fell_back = true;
        res.solver_used = LinearSolverKind::Direct;
    };

    switch (kind) {
        case LinearSolverKind::Direct:
            d = direct_solve(*mat, v);
            res.solver_used = LinearSolverKind::Direct;
            break;
        case LinearSolverKind::Pcg: {
            Vector rhs(k);
            for (Index i = 0; i < k; ++i) rhs[i] = -v[i];
            // PCG's criterion is relative to ||b||; ours is relative to 1 + ||b||.
            const double bnorm = norm2(rhs);
            const double tol = bnorm > 0.0 ? cfg.tol * (1.0 + bnorm) / bnorm : cfg.tol;
            PcgResult pr = pcg_solve(op, rhs, jacobi_preconditioner(diag), tol, cfg.maxit);
            res.iterations = pr.iterations;
            res.solver_used = LinearSolverKind::Pcg;
            if (pr.converged) {
                d = std::move(pr.x);
            } else {
                res.converged = false;
                fallback_direct();
            }
            break;
        }
        case LinearSolverKind::BlockJacobi: {
            DirectionResult bj = block_jacobi_solve(*mat, v, cfg);
            res.iterations = bj.iterations;
            res.max_block_dim = bj.max_block_dim;
            res.solver_used = LinearSolverKind::BlockJacobi;
            if (bj.converged) {
                d = std::move(bj.d);
            } else {
                res.converged = false;
                fallback_direct();
            }
            break;
        }
        case LinearSolverKind::Auto: break;
    }

    res.linear_residual = relative_residual(op, d, v);
    for (Index i = 0; i < k; ++i) res.d[reduced ? free[i] : i] = d[i];
    return res;
}

std::vector<std::pair<Index, Index>> block_ranges(Index dim, std::size_t partitions, double overlap) {
    if (partitions == 0) throw Error("block_ranges: need at least one partition");
    if (overlap < 0.0 || overlap >= 0.5) throw Error("block_ranges: overlap must lie in [0, 0.5)");
    const Index block = (dim + partitions - 1) / partitions;
    const Index extra = static_cast<Index>(std::floor(overlap * static_cast<double>(block) + 1e-9));
    std::vector<std::pair<Index, Index>> ranges;
    for (Index start = 0; start < dim; start += block) {
        const Index end = std::min(dim, start + block);
        ranges.emplace_back(start >= extra ? start - extra : 0, std::min(dim, end + extra));
    }
    return ranges;
}

DirectionResult block_jacobi_solve(const SparseMatrix& m, std::span<const double> residual,
                                   const LinearSolverConfig& cfg) {
    const Index n = m.rows();
    if (m.cols() != n || residual.size() != n) throw DimensionError("block_jacobi_solve: dimension mismatch");
    DirectionResult res;
    res.solver_used = LinearSolverKind::BlockJacobi;
    res.d.assign(n, 0.0);
    if (n == 0) return res;

    const auto ranges = block_ranges(n, std::max<std::size_t>(cfg.partitions, 1), cfg.overlap);
    std::vector<SparseCholesky> factors;
    std::vector<double> cover(n, 0.0);
    factors.reserve(ranges.size());
    for (const auto& [lo, hi] : ranges) {
        std::vector<Index> idx(hi - lo);
        for (Index i = lo; i < hi; ++i) idx[i - lo] = i;
        auto chol = SparseCholesky::factor(principal_submatrix(m, idx));
        if (!chol) throw Error("block_jacobi_solve: block factorization failed");
        factors.push_back(std::move(*chol));
        res.max_block_dim = std::max(res.max_block_dim, hi - lo);
        for (Index i = lo; i < hi; ++i) cover[i] += 1.0;
    }

    Vector b(n);
    for (Index i = 0; i < n; ++i) b[i] = -residual[i];
    const double scale = 1.0 + norm2(residual);
    Vector r = b;
    Vector md(n), corr(n);
    double rel = norm2(r) / scale;
    res.converged = rel <= cfg.tol;
    std::size_t sweep = 0;
    while (!res.converged && sweep < cfg.block_maxit) {
        ++sweep;
        std::fill(corr.begin(), corr.end(), 0.0);
        for (Index blk = 0; blk < ranges.size(); ++blk) {
            const auto [lo, hi] = ranges[blk];
            const Vector local = factors[blk].solve(std::span<const double>(r).subspan(lo, hi - lo));
            for (Index i = lo; i < hi; ++i) corr[i] += local[i - lo];
        }
        for (Index i = 0; i < n; ++i) res.d[i] += corr[i] / cover[i];
        m.matvec(res.d, md);
        for (Index i = 0; i < n; ++i) r[i] = b[i] - md[i];
        rel = norm2(r) / scale;
        res.converged = rel <= cfg.tol;
    }
    res.iterations = sweep;
    res.linear_residual = rel;
    return res;
}

}  // namespace composa
