#include "doctest.h"

#include <Eigen/Dense>

#include "composa/error.hpp"
#include "composa/io.hpp"
#include "composa/linalg.hpp"
#include "composa/sparse_cholesky.hpp"
#include "test_support.hpp"

#include <sstream>

using namespace composa;
using namespace testsupport;

namespace {
Eigen::MatrixXd to_eigen(const SparseMatrix& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<long>(m.rows()), static_cast<long>(m.cols()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index k = 0; k < m.row_cols(i).size(); ++k) d(static_cast<long>(i), static_cast<long>(m.row_cols(i)[k])) = m.row_values(i)[k];
    }
    return d;
}
}  // namespace

TEST_CASE("from_triplets sums duplicates, drops zeros and sorts rows") {
    std::vector<Triplet> dup = {{0, 0, 1.0}, {0, 0, 1.0}};
    auto a = SparseMatrix::from_triplets(dup, 1, 1);
    CHECK(a.nnz() == 1);
    CHECK(a.coeff(0, 0) == 2.0);

    std::vector<Triplet> zero = {{0, 1, 0.0}};
    auto b = SparseMatrix::from_triplets(zero, 1, 2);
    CHECK(b.nnz() == 0);
    CHECK(b.rows() == 1);

    std::vector<Triplet> unsorted = {{1, 0, 3.0}, {0, 1, -1.0}};
    auto c = SparseMatrix::from_triplets(unsorted, 2, 2);
    REQUIRE(c.row_cols(0).size() == 1);
    CHECK(c.row_cols(0)[0] == 1);
    CHECK(c.row_values(0)[0] == -1.0);
    CHECK(c.row_cols(1)[0] == 0);
    CHECK(c.row_values(1)[0] == 3.0);

    std::vector<Triplet> bad = {{2, 0, 1.0}};
    CHECK_THROWS_AS(SparseMatrix::from_triplets(bad, 2, 2), IndexError);
}

TEST_CASE("entries that cancel are dropped and column order is strict") {
    std::mt19937_64 rng(11);
    std::vector<Triplet> t = {{0, 2, 1.5}, {0, 2, -1.5}, {0, 0, 1.0}, {0, 1, 2.0}};
    auto a = SparseMatrix::from_triplets(t, 1, 3);
    CHECK(a.nnz() == 2);
    auto r = random_sparse(rng, 20, 15, 0.3);
    for (Index i = 0; i < r.rows(); ++i) {
        auto cols = r.row_cols(i);
        for (Index k = 1; k < cols.size(); ++k) CHECK(cols[k - 1] < cols[k]);
        for (double v : r.row_values(i)) CHECK(v != 0.0);
    }
}

TEST_CASE("matvec examples") {
    auto i2 = SparseMatrix::identity(2);
    CHECK(i2.matvec(Vector{3, 4}) == Vector{3, 4});
    std::vector<Triplet> t = {{0, 0, 1.0}, {0, 1, -1.0}};
    auto d = SparseMatrix::from_triplets(t, 1, 2);
    CHECK(d.matvec(Vector{2, 2}) == Vector{0});
    CHECK(d.matvec_t(Vector{1}) == Vector{1, -1});
    CHECK_THROWS_AS(d.matvec(Vector{1, 2, 3}), DimensionError);
}

TEST_CASE("adjoint identity on random matrices") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const Index r = 1 + rng() % 12, c = 1 + rng() % 12;
        auto m = random_sparse(rng, r, c, 0.4);
        auto x = random_vector(rng, c);
        auto y = random_vector(rng, r);
        const double lhs = dot(m.matvec(x), y);
        const double rhs = dot(x, m.matvec_t(y));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("select_rows") {
    std::vector<Triplet> t = {{0, 0, 1.0}, {1, 1, 1.0}, {2, 0, 1.0}, {2, 1, 1.0}};
    auto m = SparseMatrix::from_triplets(t, 3, 2);
    std::vector<Index> none;
    auto e = m.select_rows(none);
    CHECK(e.rows() == 0);
    CHECK(e.cols() == 2);
    std::vector<Index> all = {0, 1, 2};
    auto f = m.select_rows(all);
    CHECK(f.to_dense().row(2)[1] == 1.0);
    CHECK(f.nnz() == m.nnz());
    std::vector<Index> last = {2};
    auto g = m.select_rows(last);
    CHECK(g.rows() == 1);
    CHECK(g.coeff(0, 0) == 1.0);
    CHECK(g.coeff(0, 1) == 1.0);
    std::vector<Index> oob = {3};
    CHECK_THROWS_AS(m.select_rows(oob), IndexError);
}

TEST_CASE("gram_small examples and unit-vector oracle") {
    std::vector<Triplet> t = {{0, 0, 1.0}, {0, 1, -1.0}};
    auto g = gram_small(SparseMatrix::from_triplets(t, 1, 2));
    CHECK(g(0, 0) == 2.0);
    auto gi = gram_small(SparseMatrix::identity(2));
    CHECK(gi(0, 0) == 1.0);
    CHECK(gi(0, 1) == 0.0);
    std::vector<Triplet> r1 = {{0, 0, 1.0}, {1, 0, 1.0}};
    auto gr = gram_small(SparseMatrix::from_triplets(r1, 2, 2));
    CHECK(gr(0, 1) == 1.0);
    CHECK(gr(1, 1) == 1.0);

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        auto m = random_sparse(rng, 1 + rng() % 6, 1 + rng() % 9, 0.5);
        auto gm = gram_small(m);
        for (Index j = 0; j < m.rows(); ++j) {
            Vector e(m.rows(), 0.0);
            e[j] = 1.0;
            const Vector col = m.matvec(m.matvec_t(e));
            for (Index i = 0; i < m.rows(); ++i) {
                CHECK(std::abs(gm(i, j) - col[i]) <= 1e-13 * (1.0 + std::abs(col[i])));
                CHECK(gm(i, j) == gm(j, i));
            }
        }
    }
}

TEST_CASE("chol_solve") {
    DenseMatrix d(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 4;
    auto x = chol_solve(d, Vector{2, 4});
    REQUIRE(x);
    CHECK(max_abs_diff(*x, Vector{1, 1}) < 1e-14);
    auto y = chol_solve(DenseMatrix::identity(3), Vector{1, -2, 3});
    REQUIRE(y);
    CHECK(*y == Vector{1, -2, 3});
    DenseMatrix s(2, 2, 1.0);
    CHECK_FALSE(chol_solve(s, Vector{1, 2}));
}

TEST_CASE("pcg_solve") {
    auto d = SparseMatrix::diagonal(Vector{2, 4});
    auto res = pcg_solve(as_operator(d), Vector{2, 4}, jacobi_preconditioner(d.diagonal_values()), 1e-12, 10);
    CHECK(res.converged);
    CHECK(res.iterations <= 2);
    CHECK(max_abs_diff(res.x, Vector{1, 1}) < 1e-12);

    auto zero = pcg_solve(as_operator(d), Vector{0, 0}, jacobi_preconditioner(d.diagonal_values()), 1e-10, 10);
    CHECK(zero.iterations == 0);
    CHECK(zero.x == Vector{0, 0});

    std::mt19937_64 rng(3);
    for (Index n : {10, 50, 100}) {
        auto a = random_spd(rng, n, 0.5);
        auto b = random_vector(rng, n);
        auto p = pcg_solve(as_operator(a), b, jacobi_preconditioner(a.diagonal_values()), 1e-10, 5000);
        CHECK(p.converged);
        auto c = chol_solve(a.to_dense(), b);
        REQUIRE(c);
        CHECK(norm2(subtract(p.x, *c)) <= 1e-8 * norm2(*c));
    }
}

TEST_CASE("op_norm_estimate against a dense eigensolver") {
    auto id = SparseMatrix::identity(5);
    CHECK(std::abs(op_norm_estimate(as_operator(id), 5) - 1.0) < 1e-8);
    auto d = SparseMatrix::diagonal(Vector{1, 9});
    CHECK(std::abs(op_norm_estimate(as_operator(d), 2, 200) - 9.0) < 1e-6);

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        auto a = random_spd(rng, 10, 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
        const double lmax = es.eigenvalues().maxCoeff();
        const double est = op_norm_estimate(as_operator(a), 10, 500);
        CHECK(est <= lmax * (1.0 + 1e-12));
        CHECK(std::abs(est - lmax) <= 1e-4 * lmax);
    }
}

TEST_CASE("sparse Cholesky agrees with a dense factorization") {
    std::mt19937_64 rng(5);
    auto a = random_spd(rng, 40, 1.0);
    auto b = random_vector(rng, 40);
    auto chol = SparseCholesky::factor(a);
    REQUIRE(chol);
    const Eigen::VectorXd ref = to_eigen(a).llt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), 40));
    const Vector x = chol->solve(b);
    for (Index i = 0; i < 40; ++i) CHECK(std::abs(x[i] - ref[static_cast<long>(i)]) < 1e-9 * (1.0 + std::abs(ref[static_cast<long>(i)])));
    auto dense = dense_cholesky_solve(a, b);
    REQUIRE(dense);
    CHECK(max_abs_diff(*dense, x) < 1e-9);

    std::vector<Triplet> t = {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
    CHECK_FALSE(SparseCholesky::factor(SparseMatrix::from_triplets(t, 2, 2)));
}

TEST_CASE("matrix market and csv round trips") {
    std::mt19937_64 rng(6);
    auto m = random_sparse(rng, 7, 5, 0.4);
    std::stringstream ss;
    io::write_matrix_market(ss, m);
    auto back = io::read_matrix_market(ss);
    CHECK(back.rows() == 7);
    CHECK(back.cols() == 5);
    for (Index i = 0; i < 7; ++i) {
        for (Index j = 0; j < 5; ++j) CHECK(back.coeff(i, j) == m.coeff(i, j));
    }

    std::stringstream sym("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 -1.0\n");
    auto s = io::read_matrix_market(sym);
    CHECK(s.coeff(0, 1) == -1.0);
    CHECK(s.coeff(1, 0) == -1.0);

    std::stringstream bad("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
    CHECK_THROWS(io::read_matrix_market(bad));

    Vector v = {0.1, -2.5, 1e-300};
    std::stringstream cs;
    io::write_vector_csv(cs, v);
    CHECK(cs.str().rfind("value\n", 0) == 0);
    CHECK(io::read_vector_csv(cs) == v);

    std::stringstream nohdr("1.0\n2.0\n");
    CHECK_THROWS(io::read_vector_csv(nohdr));
}
