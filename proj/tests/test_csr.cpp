#include <doctest.h>

#include "glr/csr.hpp"
#include "glr/rng.hpp"
#include "oracles.hpp"

using glr::CsrMatrix;
using glr::Triplet;

TEST_CASE("from_triplets builds canonical form and sums duplicates") {
    CsrMatrix m = glr::from_triplets(3, 4, {{2, 1, 5.0}, {0, 3, 1.0}, {0, 1, 2.0}, {2, 1, 0.5}});
    glr::validate_csr(m);
    CHECK(m.nnz() == 3);
    CHECK(m.row_cols(0)[0] == 1);
    CHECK(m.row_cols(0)[1] == 3);
    CHECK(m.row_values(2)[0] == doctest::Approx(5.5));
    CHECK(m.row_nnz(1) == 0);

    CHECK_THROWS_AS(glr::from_triplets(2, 2, {{2, 0, 1.0}}), std::out_of_range);
    CHECK_THROWS_AS(glr::from_triplets(2, 2, {{0, 2, 1.0}}), std::out_of_range);
}

TEST_CASE("hconcat shifts columns and keeps canonical form") {
    CsrMatrix a = glr::from_triplets(1, 2, {{0, 0, 1.0}});
    CsrMatrix b = glr::from_triplets(1, 3, {{0, 1, 2.0}});
    CsrMatrix h = glr::hconcat(a, b);
    glr::validate_csr(h);
    CHECK(h.n_cols == 5);
    REQUIRE(h.nnz() == 2);
    CHECK(h.row_cols(0)[0] == 0);
    CHECK(h.row_cols(0)[1] == 3);

    SUBCASE("identity case: empty right block") {
        CsrMatrix empty;
        empty.n_rows = 1;
        empty.n_cols = 0;
        empty.row_ptr = {0, 0};
        CHECK(glr::hconcat(a, empty) == a);
    }
    SUBCASE("row-count mismatch") {
        CsrMatrix two = glr::from_triplets(2, 1, {});
        CHECK_THROWS_AS(glr::hconcat(a, two), std::invalid_argument);
    }
}

TEST_CASE("hconcat properties: nnz additivity, split recovery") {
    glr::SplitMix64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto fa = oracles::random_graph(rng.next(), 9, 5, 2, 0.3).features;
        auto fb = oracles::random_graph(rng.next(), 9, 7, 2, 0.3).features;
        CsrMatrix a = glr::from_triplets(9, 5, fa);
        CsrMatrix b = glr::from_triplets(9, 7, fb);
        CsrMatrix h = glr::hconcat(a, b);
        glr::validate_csr(h);
        CHECK(h.nnz() == a.nnz() + b.nnz());
        CHECK(glr::col_range_submatrix(h, 0, a.n_cols) == a);
        CHECK(glr::col_range_submatrix(h, a.n_cols, h.n_cols) == b);
    }
}

TEST_CASE("spmv basics") {
    CsrMatrix eye = glr::csr_identity(3);
    std::vector<double> x{1.0, 2.0, 3.0};
    CHECK(glr::spmv(eye, x) == x);

    CsrMatrix swap = glr::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
    std::vector<double> y = glr::spmv(swap, std::vector<double>{3.0, 5.0});
    CHECK(y == std::vector<double>{5.0, 3.0});

    CHECK_THROWS_AS(glr::spmv(eye, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("spmv and spmm agree with the dense brute-force oracle") {
    glr::SplitMix64 rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        std::size_t rows = 1 + rng.bounded(50);
        std::size_t cols = 1 + rng.bounded(50);
        std::vector<Triplet> triplets;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                if (rng.uniform() < 0.2) triplets.push_back({r, c, rng.normal()});
        CsrMatrix m = glr::from_triplets(rows, cols, triplets);
        auto dense = oracles::dense_from_csr(m);

        std::vector<double> x(cols);
        for (double& v : x) v = rng.normal();
        auto got = glr::spmv(m, x);
        auto want = oracles::dense_matvec(dense, x);
        for (std::size_t r = 0; r < rows; ++r) CHECK(got[r] == doctest::Approx(want[r]).epsilon(1e-12));

        glr::DenseMatrix b(cols, 3);
        for (double& v : b.data) v = rng.normal();
        glr::DenseMatrix product = glr::spmm_dense(m, b);
        oracles::Dense b_rows(cols, std::vector<double>(3));
        for (std::size_t r = 0; r < cols; ++r)
            for (std::size_t c = 0; c < 3; ++c) b_rows[r][c] = b.at(r, c);
        auto want_mm = oracles::dense_matmul(dense, b_rows);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < 3; ++c)
                CHECK(product.at(r, c) == doctest::Approx(want_mm[r][c]).epsilon(1e-12));
    }
}

TEST_CASE("row_submatrix preserves requested order") {
    CsrMatrix m = glr::from_triplets(4, 3, {{0, 0, 1.0}, {1, 1, 2.0}, {3, 2, 3.0}});
    std::vector<std::size_t> rows{3, 0};
    CsrMatrix sub = glr::row_submatrix(m, rows);
    glr::validate_csr(sub);
    CHECK(sub.n_rows == 2);
    CHECK(sub.row_cols(0)[0] == 2);
    CHECK(sub.row_cols(1)[0] == 0);
    std::vector<std::size_t> bad{4};
    CHECK_THROWS_AS(glr::row_submatrix(m, bad), std::out_of_range);
}

TEST_CASE("transpose is an involution and matches the dense oracle") {
    glr::SplitMix64 rng(5);
    auto fx = oracles::random_graph(rng.next(), 12, 8, 2, 0.3).features;
    CsrMatrix m = glr::from_triplets(12, 8, fx);
    CsrMatrix t = glr::transpose(m);
    glr::validate_csr(t);
    CHECK(glr::transpose(t) == m);
    auto dense = oracles::dense_from_csr(m);
    auto dense_t = oracles::dense_from_csr(t);
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t c = 0; c < m.n_cols; ++c) CHECK(dense[r][c] == dense_t[c][r]);
}

TEST_CASE("l2_normalize_rows leaves zero rows alone") {
    CsrMatrix m = glr::from_triplets(3, 2, {{0, 0, 3.0}, {0, 1, 4.0}, {2, 1, 2.0}});
    CsrMatrix n = glr::l2_normalize_rows(m);
    CHECK(n.row_values(0)[0] == doctest::Approx(0.6));
    CHECK(n.row_values(0)[1] == doctest::Approx(0.8));
    CHECK(n.row_nnz(1) == 0);
    CHECK(n.row_values(2)[0] == doctest::Approx(1.0));
}
