#pragma once

#include <string>
#include <vector>

#include "composa/linalg.hpp"
#include "composa/problems.hpp"
#include "composa/subgradient.hpp"

namespace composa {

struct SignChangeSet {
    std::vector<Index> indices;
    SparseMatrix cs;  // C restricted to `indices`
    Vector trial_x;
};

/// Rows whose sign at `trial` disagrees with the current multiplier. For a
/// row that is nonzero at x this is a genuine sign flip (a trial value inside
/// the tolerance band counts as a flip); for an active row it is
/// sign(xi_i) * <c_i, trial - x> <= 0.
SignChangeSet sign_change_set(const SparseMatrix& c, std::span<const double> x, std::span<const double> xi,
                              std::span<const double> trial, double tol_act);

struct Projection {
    Vector x;           // closest point with Cs x = 0
    Vector multiplier;  // (Cs Cs^T)^{-1} Cs x
    bool regularized = false;
};

/// Euclidean projection onto {z : Cs z = 0} via the normal equations. A
/// rank-deficient Cs is handled by adding eps_reg * max(diag, 1) to the
/// Gram diagonal. Systems larger than `dense_budget` use a sparse factor.
Projection project_onto_subspace(std::span<const double> x, const SparseMatrix& cs, double eps_reg = 1e-10,
                                 Index dense_budget = 256);

enum class SlopeKind { MinNorm, Tilde };

std::string to_string(SlopeKind kind);
SlopeKind parse_slope_kind(const std::string& name);

/// Treatment of active rows whose multiplier lies strictly inside (-1, 1).
/// Off: sign rule only. Fallback: when a trial fails the decrease test, retry
/// it with those rows added to S. Always: add them to S for every trial.
enum class InteriorPinning { Off, Fallback, Always };

std::string to_string(InteriorPinning mode);
InteriorPinning parse_interior_pinning(const std::string& name);

/// S extended by active rows with |xi_i| < 1 - margin.
SignChangeSet pin_interior_rows(const SparseMatrix& c, const SignChangeSet& s, const IndexPartition& part,
                                std::span<const double> xi, double margin);

struct LineSearchConfig {
    double sigma = 1e-2;
    double s_min = 1e-12;
    std::size_t max_backtracks = 40;
    SlopeKind slope = SlopeKind::MinNorm;
    double eps_reg = 1e-10;
    InteriorPinning pinning = InteriorPinning::Fallback;
    double interior_margin = 1e-6;
};

struct LineSearchResult {
    double step = 0.0;
    Vector x_next;
    double cost_next = 0.0;
    std::vector<Index> sign_changes;
    std::size_t trials = 0;
    bool stalled = false;
    bool decreased = false;  // cost_next < cost at x
    bool pinned = false;     // accepted trial used the interior-pinned set
};

/// Backtracking s = 1, 1/2, 1/4, ... on the projected trial points. A trial
/// is accepted when phi(P(x + s d)) < phi(x) + sigma * min(v^T (P(x + s d) - x), 0).
/// On failure, the best trial seen is returned with `stalled` set. See
/// InteriorPinning for the optional extension of S.
LineSearchResult projected_linesearch(const ProblemSpec& p, std::span<const double> x, double cost_x,
                                      std::span<const double> d, const SubgradientState& state,
                                      const LineSearchConfig& cfg);

}  // namespace composa
