#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "composa/io.hpp"
#include "composa/linalg.hpp"

namespace composa {

/// Curvature of the smooth part at a point: an explicit symmetric matrix, a
/// diagonal, or the Gram operator A^T A of a stored factor A.
struct CurvatureInfo {
    enum class Kind { Matrix, Diagonal, Gram };

    Kind kind = Kind::Diagonal;
    std::shared_ptr<const SparseMatrix> matrix;  // B (Matrix) or A (Gram)
    Vector diagonal;                             // Diagonal only
    bool spd_guaranteed = false;

    static CurvatureInfo explicit_matrix(std::shared_ptr<const SparseMatrix> b, bool spd_guaranteed);
    static CurvatureInfo diagonal_values(Vector d, bool spd_guaranteed);
    static CurvatureInfo gram(std::shared_ptr<const SparseMatrix> a);

    Index dim() const;
    void apply(std::span<const double> x, std::span<double> y) const;
    Vector diag() const;
    double trace() const;
};

/// f(x) = 0.5 x^T H x - b^T x + constant
struct QuadraticForm {
    std::shared_ptr<const SparseMatrix> hessian;
    Vector linear;
    double constant = 0.0;
};

class SmoothPart {
public:
    virtual ~SmoothPart() = default;

    virtual Index dim() const = 0;
    virtual double value(std::span<const double> x) const = 0;
    virtual Vector gradient(std::span<const double> x) const = 0;
    virtual CurvatureInfo curvature(std::span<const double> x) const = 0;
    /// Present only when the smooth part is an explicit quadratic.
    virtual std::optional<QuadraticForm> quadratic() const { return std::nullopt; }
    virtual std::string name() const = 0;
};

class QuadraticSmooth final : public SmoothPart {
public:
    QuadraticSmooth(std::shared_ptr<const SparseMatrix> h, Vector b, double constant = 0.0);

    Index dim() const override { return b_.size(); }
    double value(std::span<const double> x) const override;
    Vector gradient(std::span<const double> x) const override;
    CurvatureInfo curvature(std::span<const double> x) const override;
    std::optional<QuadraticForm> quadratic() const override;
    std::string name() const override { return "quadratic"; }

private:
    std::shared_ptr<const SparseMatrix> h_;
    Vector b_;
    double constant_;
};

/// 0.5 ||x - center||^2
class DistanceSmooth final : public SmoothPart {
public:
    explicit DistanceSmooth(Vector center);

    Index dim() const override { return center_.size(); }
    double value(std::span<const double> x) const override;
    Vector gradient(std::span<const double> x) const override;
    CurvatureInfo curvature(std::span<const double> x) const override;
    std::optional<QuadraticForm> quadratic() const override;
    std::string name() const override { return "distance"; }

private:
    Vector center_;
    std::shared_ptr<const SparseMatrix> identity_;
};

/// 0.5 ||A x - y||^2. The curvature A^T A is assembled once for
/// m <= operator_threshold or when A is sparse (density <= 0.1), and kept in
/// operator form otherwise.
class LeastSquaresSmooth final : public SmoothPart {
public:
    LeastSquaresSmooth(SparseMatrix a, Vector y, Index operator_threshold = 4000);

    Index dim() const override { return a_->cols(); }
    double value(std::span<const double> x) const override;
    Vector gradient(std::span<const double> x) const override;
    CurvatureInfo curvature(std::span<const double> x) const override;
    std::optional<QuadraticForm> quadratic() const override;
    std::string name() const override { return "least_squares"; }

    const SparseMatrix& design() const { return *a_; }

private:
    std::shared_ptr<const SparseMatrix> a_;
    Vector y_;
    std::shared_ptr<const SparseMatrix> gram_;  // null in operator mode
};

/// sum_i log(a + (u_i - f_i)^2); nonconvex.
class CauchySmooth final : public SmoothPart {
public:
    CauchySmooth(Vector observed, double scale);

    Index dim() const override { return observed_.size(); }
    double value(std::span<const double> x) const override;
    Vector gradient(std::span<const double> x) const override;
    CurvatureInfo curvature(std::span<const double> x) const override;
    std::string name() const override { return "cauchy"; }

private:
    Vector observed_;
    double scale_;
};

/// Smooth part f paired with the penalty beta * ||C x||_1. Optional row
/// weights are folded into C at construction.
class ProblemSpec {
public:
    ProblemSpec(std::shared_ptr<const SmoothPart> smooth, SparseMatrix c, double beta,
                std::optional<Vector> row_weights = std::nullopt, std::string kind = "custom");

    Index dim() const noexcept { return smooth_->dim(); }
    const SmoothPart& smooth() const noexcept { return *smooth_; }
    const SparseMatrix& penalty() const noexcept { return *c_; }
    double beta() const noexcept { return beta_; }
    const std::string& kind() const noexcept { return kind_; }

    /// Smooth value; throws EvaluationError on a non-finite result.
    double smooth_value(std::span<const double> x) const;
    Vector gradient(std::span<const double> x) const;
    double penalty_value(std::span<const double> x) const;

private:
    std::shared_ptr<const SmoothPart> smooth_;
    std::shared_ptr<const SparseMatrix> c_;
    double beta_;
    std::string kind_;
};

/// f(x) + beta * ||C x||_1. The single cost routine used everywhere.
double eval_cost(const ProblemSpec& p, std::span<const double> x);

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Anisotropic forward differences on an n x n grid (row-major nodes): all
/// horizontal pairs first, then all vertical pairs.
SparseMatrix grid_difference_operator(Index grid_n);
/// 5-point Dirichlet Laplacian scaled by h^2 (diagonal 4, neighbours -1).
SparseMatrix dirichlet_laplacian(Index grid_n);
/// One row per edge: -1 at the source, +1 at the target.
SparseMatrix oriented_incidence(const std::vector<io::Edge>& edges, Index nodes);
/// Second-order graph difference operator, Delta1^T Delta1.
SparseMatrix graph_second_difference(const std::vector<io::Edge>& edges, Index nodes);

// ---------------------------------------------------------------------------
// Built-in problems
// ---------------------------------------------------------------------------

using ScalarField = std::function<double(double, double)>;

ProblemSpec build_quadratic_tv(Index grid_n, const ScalarField& forcing, double beta);
/// Deconvolution row incidence is +1 at the first endpoint, -1 at the second.
ProblemSpec build_deconvolution(SparseMatrix a, Vector y, double alpha, double beta,
                                const std::vector<io::Edge>& neighbor_edges);
ProblemSpec build_cauchy_denoise(Vector f_obs, double a, double beta, Index grid_n);
ProblemSpec build_graph_trend(const std::vector<io::Edge>& edges, Vector y, double beta1, double beta2);
ProblemSpec build_prox_instance(Vector xhat, SparseMatrix c, double alpha);

// ---------------------------------------------------------------------------
// Synthetic data (seeded)
// ---------------------------------------------------------------------------

/// f = u + xi * eta1 / eta2 with eta1, eta2 standard normal.
Vector cauchy_noise(std::span<const double> u, double xi, std::uint64_t seed);
Vector gaussian_noise(std::span<const double> u, double sigma, std::uint64_t seed);
/// Piecewise-constant test image with values in [0, 1].
Vector phantom_image(Index grid_n);
/// 4-neighbour grid graph, node (r, c) -> r * cols + c.
std::vector<io::Edge> grid_graph_edges(Index rows, Index cols);
/// Piecewise-constant signal on a rows x cols grid graph (four blocks).
Vector blocky_grid_signal(Index rows, Index cols);
/// Neighbour edges of a grid image (horizontal and vertical pairs).
std::vector<io::Edge> image_neighbor_edges(Index grid_n);
/// Row-stochastic blur on an n x n image: `center_weight` on the pixel, the
/// rest spread evenly over the in-bounds (2 radius + 1)^2 - 1 neighbours.
SparseMatrix blur_operator(Index grid_n, Index radius, double center_weight);

}  // namespace composa
