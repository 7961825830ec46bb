#include "composa/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "composa/error.hpp"

namespace composa {

// ---------------------------------------------------------------------------
// CurvatureInfo
// ---------------------------------------------------------------------------

CurvatureInfo CurvatureInfo::explicit_matrix(std::shared_ptr<const SparseMatrix> b, bool spd_guaranteed) {
    CurvatureInfo c;
    c.kind = Kind::Matrix;
    c.matrix = std::move(b);
    c.spd_guaranteed = spd_guaranteed;
    return c;
}

CurvatureInfo CurvatureInfo::diagonal_values(Vector d, bool spd_guaranteed) {
    CurvatureInfo c;
    c.kind = Kind::Diagonal;
    c.diagonal = std::move(d);
    c.spd_guaranteed = spd_guaranteed;
    return c;
}

CurvatureInfo CurvatureInfo::gram(std::shared_ptr<const SparseMatrix> a) {
    CurvatureInfo c;
    c.kind = Kind::Gram;
    c.matrix = std::move(a);
    c.spd_guaranteed = true;
    return c;
}

Index CurvatureInfo::dim() const {
    switch (kind) {
        case Kind::Matrix: return matrix->rows();
        case Kind::Diagonal: return diagonal.size();
        case Kind::Gram: return matrix->cols();
    }
    return 0;
}

void CurvatureInfo::apply(std::span<const double> x, std::span<double> y) const {
    switch (kind) {
        case Kind::Matrix: matrix->matvec(x, y); break;
        case Kind::Diagonal:
            for (Index i = 0; i < x.size(); ++i) y[i] = diagonal[i] * x[i];
            break;
        case Kind::Gram: {
            const Vector ax = matrix->matvec(x);
            matrix->matvec_t(ax, y);
            break;
        }
    }
}

Vector CurvatureInfo::diag() const {
    switch (kind) {
        case Kind::Matrix: return matrix->diagonal_values();
        case Kind::Diagonal: return diagonal;
        case Kind::Gram: {
            Vector d(matrix->cols(), 0.0);
            for (Index i = 0; i < matrix->rows(); ++i) {
                auto cols = matrix->row_cols(i);
                auto vals = matrix->row_values(i);
                for (Index k = 0; k < cols.size(); ++k) d[cols[k]] += vals[k] * vals[k];
            }
            return d;
        }
    }
    return {};
}

double CurvatureInfo::trace() const {
    const Vector d = diag();
    double t = 0.0;
    for (double v : d) t += v;
    return t;
}

// ---------------------------------------------------------------------------
// Smooth parts
// ---------------------------------------------------------------------------

QuadraticSmooth::QuadraticSmooth(std::shared_ptr<const SparseMatrix> h, Vector b, double constant)
    : h_(std::move(h)), b_(std::move(b)), constant_(constant) {
    if (h_->rows() != h_->cols() || h_->rows() != b_.size()) {
        throw DimensionError("QuadraticSmooth: H and b do not conform");
    }
}

double QuadraticSmooth::value(std::span<const double> x) const {
    const Vector hx = h_->matvec(x);
    return 0.5 * dot(x, hx) - dot(b_, x) + constant_;
}

Vector QuadraticSmooth::gradient(std::span<const double> x) const {
    Vector g = h_->matvec(x);
    axpy(-1.0, b_, g);
    return g;
}

CurvatureInfo QuadraticSmooth::curvature(std::span<const double>) const {
    return CurvatureInfo::explicit_matrix(h_, true);
}

std::optional<QuadraticForm> QuadraticSmooth::quadratic() const { return QuadraticForm{h_, b_, constant_}; }

DistanceSmooth::DistanceSmooth(Vector center)
    : center_(std::move(center)),
      identity_(std::make_shared<SparseMatrix>(SparseMatrix::identity(center_.size()))) {}

double DistanceSmooth::value(std::span<const double> x) const {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        const double r = x[i] - center_[i];
        s += r * r;
    }
    return 0.5 * s;
}

Vector DistanceSmooth::gradient(std::span<const double> x) const { return subtract(x, center_); }

CurvatureInfo DistanceSmooth::curvature(std::span<const double>) const {
    return CurvatureInfo::explicit_matrix(identity_, true);
}

std::optional<QuadraticForm> DistanceSmooth::quadratic() const {
    return QuadraticForm{identity_, center_, 0.5 * dot(center_, center_)};
}

LeastSquaresSmooth::LeastSquaresSmooth(SparseMatrix a, Vector y, Index operator_threshold)
    : a_(std::make_shared<SparseMatrix>(std::move(a))), y_(std::move(y)) {
    if (a_->rows() != y_.size()) throw DimensionError("LeastSquaresSmooth: A and y do not conform");
    const double density = a_->rows() * a_->cols() == 0
                               ? 0.0
                               : static_cast<double>(a_->nnz()) / static_cast<double>(a_->rows() * a_->cols());
    if (a_->cols() <= operator_threshold || density <= 0.1) {
        gram_ = std::make_shared<SparseMatrix>(multiply(a_->transpose(), *a_));
    }
}

double LeastSquaresSmooth::value(std::span<const double> x) const {
    const Vector r = subtract(a_->matvec(x), y_);
    return 0.5 * dot(r, r);
}

Vector LeastSquaresSmooth::gradient(std::span<const double> x) const {
    const Vector r = subtract(a_->matvec(x), y_);
    return a_->matvec_t(r);
}

CurvatureInfo LeastSquaresSmooth::curvature(std::span<const double>) const {
    if (gram_) return CurvatureInfo::explicit_matrix(gram_, true);
    return CurvatureInfo::gram(a_);
}

std::optional<QuadraticForm> LeastSquaresSmooth::quadratic() const {
    auto h = gram_ ? gram_ : std::make_shared<SparseMatrix>(multiply(a_->transpose(), *a_));
    return QuadraticForm{h, a_->matvec_t(y_), 0.5 * dot(y_, y_)};
}

CauchySmooth::CauchySmooth(Vector observed, double scale) : observed_(std::move(observed)), scale_(scale) {
    if (!(scale_ > 0.0)) throw Error("CauchySmooth: scale parameter a must be positive");
}

double CauchySmooth::value(std::span<const double> x) const {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        const double r = x[i] - observed_[i];
        s += std::log(scale_ + r * r);
    }
    return s;
}

Vector CauchySmooth::gradient(std::span<const double> x) const {
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double r = x[i] - observed_[i];
        g[i] = 2.0 * r / (scale_ + r * r);
    }
    return g;
}

CurvatureInfo CauchySmooth::curvature(std::span<const double> x) const {
    Vector h(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double r2 = (x[i] - observed_[i]) * (x[i] - observed_[i]);
        const double den = scale_ + r2;
        h[i] = 2.0 * (scale_ - r2) / (den * den);
    }
    return CurvatureInfo::diagonal_values(std::move(h), false);
}

// ---------------------------------------------------------------------------
// ProblemSpec
// ---------------------------------------------------------------------------

ProblemSpec::ProblemSpec(std::shared_ptr<const SmoothPart> smooth, SparseMatrix c, double beta,
                         std::optional<Vector> row_weights, std::string kind)
    : smooth_(std::move(smooth)), beta_(beta), kind_(std::move(kind)) {
    if (!smooth_) throw Error("ProblemSpec: missing smooth part");
    if (c.cols() != smooth_->dim()) throw DimensionError("ProblemSpec: C has wrong column count");
    if (!(beta_ > 0.0)) throw Error("ProblemSpec: beta must be positive");
    if (row_weights) {
        if (row_weights->size() != c.rows()) throw DimensionError("ProblemSpec: row weight length mismatch");
        for (double w : *row_weights) {
            if (!(w > 0.0)) throw Error("ProblemSpec: row weights must be strictly positive");
        }
        c = c.scale_rows(*row_weights);
    }
    c_ = std::make_shared<SparseMatrix>(std::move(c));
}

double ProblemSpec::smooth_value(std::span<const double> x) const {
    if (x.size() != dim()) throw DimensionError("smooth_value: wrong length");
    const double v = smooth_->value(x);
    if (!std::isfinite(v)) {
        throw EvaluationError("smooth part returned a non-finite value", Vector(x.begin(), x.end()));
    }
    return v;
}

Vector ProblemSpec::gradient(std::span<const double> x) const {
    if (x.size() != dim()) throw DimensionError("gradient: wrong length");
    Vector g = smooth_->gradient(x);
    if (!all_finite(g)) {
        throw EvaluationError("smooth gradient has non-finite entries", Vector(x.begin(), x.end()));
    }
    return g;
}

double ProblemSpec::penalty_value(std::span<const double> x) const {
    double s = 0.0;
    for (Index i = 0; i < c_->rows(); ++i) s += std::abs(c_->row_dot(i, x));
    return beta_ * s;
}

double eval_cost(const ProblemSpec& p, std::span<const double> x) {
    return p.smooth_value(x) + p.penalty_value(x);
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

SparseMatrix grid_difference_operator(Index grid_n) {
    std::vector<Triplet> t;
    Index row = 0;
    for (Index r = 0; r < grid_n; ++r) {
        for (Index c = 0; c + 1 < grid_n; ++c) {
            t.push_back({row, r * grid_n + c + 1, 1.0});
            t.push_back({row, r * grid_n + c, -1.0});
            ++row;
        }
    }
    for (Index r = 0; r + 1 < grid_n; ++r) {
        for (Index c = 0; c < grid_n; ++c) {
            t.push_back({row, (r + 1) * grid_n + c, 1.0});
            t.push_back({row, r * grid_n + c, -1.0});
            ++row;
        }
    }
    return SparseMatrix::from_triplets(t, row, grid_n * grid_n);
}

SparseMatrix dirichlet_laplacian(Index grid_n) {
    std::vector<Triplet> t;
    for (Index r = 0; r < grid_n; ++r) {
        for (Index c = 0; c < grid_n; ++c) {
            const Index k = r * grid_n + c;
            t.push_back({k, k, 4.0});
            if (c > 0) t.push_back({k, k - 1, -1.0});
            if (c + 1 < grid_n) t.push_back({k, k + 1, -1.0});
            if (r > 0) t.push_back({k, k - grid_n, -1.0});
            if (r + 1 < grid_n) t.push_back({k, k + grid_n, -1.0});
        }
    }
    return SparseMatrix::from_triplets(t, grid_n * grid_n, grid_n * grid_n);
}

SparseMatrix oriented_incidence(const std::vector<io::Edge>& edges, Index nodes) {
    std::vector<Triplet> t;
    t.reserve(2 * edges.size());
    for (Index e = 0; e < edges.size(); ++e) {
        const auto [s, d] = edges[e];
        if (s == d) throw Error("graph edge " + std::to_string(e) + " is a self-loop");
        if (s >= nodes || d >= nodes) throw IndexError("graph edge " + std::to_string(e) + " out of range");
        t.push_back({e, s, -1.0});
        t.push_back({e, d, 1.0});
    }
    return SparseMatrix::from_triplets(t, edges.size(), nodes);
}

SparseMatrix graph_second_difference(const std::vector<io::Edge>& edges, Index nodes) {
    const SparseMatrix d1 = oriented_incidence(edges, nodes);
    return multiply(d1.transpose(), d1);
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

ProblemSpec build_quadratic_tv(Index grid_n, const ScalarField& forcing, double beta) {
    if (grid_n < 2) throw Error("build_quadratic_tv: grid_n must be at least 2");
    const double h = 1.0 / static_cast<double>(grid_n + 1);
    Vector b(grid_n * grid_n);
    for (Index r = 0; r < grid_n; ++r) {
        for (Index c = 0; c < grid_n; ++c) {
            b[r * grid_n + c] = h * h * forcing((c + 1) * h, (r + 1) * h);
        }
    }
    auto a = std::make_shared<SparseMatrix>(dirichlet_laplacian(grid_n));
    return ProblemSpec(std::make_shared<QuadraticSmooth>(a, std::move(b)), grid_difference_operator(grid_n), beta,
                       std::nullopt, "quadratic_tv");
}

ProblemSpec build_deconvolution(SparseMatrix a, Vector y, double alpha, double beta,
                                const std::vector<io::Edge>& neighbor_edges) {
    if (a.rows() != y.size()) throw DimensionError("build_deconvolution: A and y do not conform");
    if (alpha < 0.0 || beta < 0.0) throw Error("build_deconvolution: alpha and beta must be non-negative");
    if (alpha == 0.0 && beta == 0.0) throw Error("build_deconvolution: alpha and beta cannot both be zero");
    const Index m = a.cols();
    const double weight = beta > 0.0 ? beta : alpha;

    SparseMatrix c(0, m);
    if (alpha > 0.0) c = SparseMatrix::identity(m, alpha / weight);
    if (beta > 0.0 && !neighbor_edges.empty()) {
        std::vector<Triplet> t;
        for (Index e = 0; e < neighbor_edges.size(); ++e) {
            const auto [i, j] = neighbor_edges[e];
            if (i == j) throw Error("build_deconvolution: self-loop edge");
            if (i >= m || j >= m) throw IndexError("build_deconvolution: edge out of range");
            t.push_back({e, i, 1.0});
            t.push_back({e, j, -1.0});
        }
        c = vstack(c, SparseMatrix::from_triplets(t, neighbor_edges.size(), m));
    }
    return ProblemSpec(std::make_shared<LeastSquaresSmooth>(std::move(a), std::move(y)), std::move(c), weight,
                       std::nullopt, "deconvolution");
}

ProblemSpec build_cauchy_denoise(Vector f_obs, double a, double beta, Index grid_n) {
    if (!(a > 0.0)) throw Error("build_cauchy_denoise: a must be positive");
    if (f_obs.size() != grid_n * grid_n) throw DimensionError("build_cauchy_denoise: f_obs is not grid_n^2 long");
    return ProblemSpec(std::make_shared<CauchySmooth>(std::move(f_obs), a), grid_difference_operator(grid_n), beta,
                       std::nullopt, "cauchy");
}

ProblemSpec build_graph_trend(const std::vector<io::Edge>& edges, Vector y, double beta1, double beta2) {
    if (beta1 < 0.0 || beta2 < 0.0 || (beta1 == 0.0 && beta2 == 0.0)) {
        throw Error("build_graph_trend: need beta1 > 0 or beta2 > 0 (both non-negative)");
    }
    Index nodes = y.size();
    for (const auto& [s, d] : edges) nodes = std::max({nodes, s + 1, d + 1});
    if (nodes != y.size()) throw DimensionError("build_graph_trend: edges reference nodes beyond y");

    SparseMatrix c(0, nodes);
    Vector weights;
    if (beta1 > 0.0) {
        c = graph_second_difference(edges, nodes);
        weights.assign(c.rows(), beta1);
    }
    if (beta2 > 0.0) {
        c = vstack(c, SparseMatrix::identity(nodes));
        weights.insert(weights.end(), nodes, beta2);
    }
    return ProblemSpec(std::make_shared<DistanceSmooth>(std::move(y)), std::move(c), 1.0, std::move(weights),
                       "graph_trend");
}

ProblemSpec build_prox_instance(Vector xhat, SparseMatrix c, double alpha) {
    if (c.cols() != xhat.size()) throw DimensionError("build_prox_instance: C and xhat do not conform");
    return ProblemSpec(std::make_shared<DistanceSmooth>(std::move(xhat)), std::move(c), alpha, std::nullopt, "prox");
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

Vector cauchy_noise(std::span<const double> u, double xi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector f(u.begin(), u.end());
    for (double& v : f) {
        const double eta1 = normal(rng);
        const double eta2 = normal(rng);
        v += xi * eta1 / eta2;
    }
    return f;
}

Vector gaussian_noise(std::span<const double> u, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    Vector f(u.begin(), u.end());
    for (double& v : f) v += normal(rng);
    return f;
}

Vector phantom_image(Index grid_n) {
    Vector img(grid_n * grid_n, 0.1);
    const double n = static_cast<double>(grid_n);
    for (Index r = 0; r < grid_n; ++r) {
        for (Index c = 0; c < grid_n; ++c) {
            const double x = (c + 0.5) / n;
            const double y = (r + 0.5) / n;
            double v = 0.1;
            if (x > 0.15 && x < 0.5 && y > 0.15 && y < 0.5) v = 0.9;
            const double dx = x - 0.68, dy = y - 0.66;
            if (dx * dx + dy * dy < 0.22 * 0.22) v = 0.5;
            img[r * grid_n + c] = v;
        }
    }
    return img;
}

std::vector<io::Edge> grid_graph_edges(Index rows, Index cols) {
    std::vector<io::Edge> edges;
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const Index k = r * cols + c;
            if (c + 1 < cols) edges.emplace_back(k, k + 1);
            if (r + 1 < rows) edges.emplace_back(k, k + cols);
        }
    }
    return edges;
}

Vector blocky_grid_signal(Index rows, Index cols) {
    Vector s(rows * cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const bool top = 2 * r < rows;
            const bool left = 2 * c < cols;
            s[r * cols + c] = top ? (left ? 2.0 : 0.0) : (left ? 1.0 : 3.0);
        }
    }
    return s;
}

std::vector<io::Edge> image_neighbor_edges(Index grid_n) { return grid_graph_edges(grid_n, grid_n); }

SparseMatrix blur_operator(Index grid_n, Index radius, double center_weight) {
    if (grid_n == 0) throw Error("blur_operator: grid_n must be positive");
    if (!(center_weight > 0.0) || center_weight > 1.0) throw Error("blur_operator: center_weight must lie in (0, 1]");
    const long n = static_cast<long>(grid_n);
    const long rad = static_cast<long>(radius);
    std::vector<Triplet> trips;
    for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) {
            std::vector<Index> nbrs;
            for (long dr = -rad; dr <= rad; ++dr) {
                for (long dc = -rad; dc <= rad; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const long rr = r + dr, cc = c + dc;
                    if (rr >= 0 && rr < n && cc >= 0 && cc < n) nbrs.push_back(static_cast<Index>(rr * n + cc));
                }
            }
            const Index row = static_cast<Index>(r * n + c);
            const double w = nbrs.empty() ? 0.0 : (1.0 - center_weight) / static_cast<double>(nbrs.size());
            trips.push_back({row, row, nbrs.empty() ? 1.0 : center_weight});
            for (Index k : nbrs) trips.push_back({row, k, w});
        }
    }
    return SparseMatrix::from_triplets(trips, grid_n * grid_n, grid_n * grid_n);
}

}  // namespace composa
