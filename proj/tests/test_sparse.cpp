#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "pcp/csr.hpp"
#include "pcp/dense.hpp"
#include "pcp/ilu.hpp"
#include "pcp/matrix_market.hpp"

using namespace pcp;

namespace {

CsrMatrix tridiag(int n, double lo, double di, double up) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        if (i > 0) t.push_back({i, i - 1, lo});
        t.push_back({i, i, di});
        if (i + 1 < n) t.push_back({i, i + 1, up});
    }
    return csr_from_triplets(n, n, t);
}

}  // namespace

TEST_SUITE("sparse") {

TEST_CASE("spmv: identity passes the vector through") {
    CsrMatrix a = csr_identity(3);
    std::vector<double> y = spmv(a, {7.0, -1.0, 2.0});
    CHECK(y == std::vector<double>{7.0, -1.0, 2.0});
}

TEST_CASE("spmv: second-difference tridiagonal") {
    CsrMatrix a = tridiag(3, 1.0, -2.0, 1.0);
    std::vector<double> y = spmv(a, {1.0, 2.0, 3.0});
    CHECK(y[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(y[2] == doctest::Approx(-4.0).epsilon(1e-15));
}

TEST_CASE("spmv: zero matrix and dimension mismatch") {
    CsrMatrix z;
    z.n_rows = 2;
    z.n_cols = 3;
    z.row_ptr = {0, 0, 0};
    std::vector<double> y = spmv(z, {1.0, 1.0, 1.0});
    CHECK(y == std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS((void)spmv(z, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("spmv_transpose: identity and a nilpotent 2x2") {
    CHECK(spmv_transpose(csr_identity(2), {3.0, 4.0}) == std::vector<double>{3.0, 4.0});
    CsrMatrix a = csr_from_triplets(2, 2, {{0, 1, 1.0}});
    CHECK(spmv_transpose(a, {5.0, 9.0}) == std::vector<double>{0.0, 5.0});
    CHECK_THROWS_AS((void)spmv_transpose(a, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("spmv_transpose: adjoint identity against dense product") {
    for (int n : {10, 50, 200}) {
        CsrMatrix a = csr_from_triplets(n, n, oracle::random_dd_triplets(n, 0.1, 77 + n));
        oracle::Mat ad = oracle::dense_of(a);
        std::vector<double> v = oracle::random_vector(n, 1);
        std::vector<double> w = oracle::random_vector(n, 2);
        std::vector<double> av = spmv(a, v);
        std::vector<double> atw = spmv_transpose(a, w);
        CHECK(oracle::max_abs_diff(atw, oracle::matvec_transpose(ad, w)) < 1e-12);
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < n; ++i) {
            lhs += av[i] * w[i];
            rhs += v[i] * atw[i];
        }
        CHECK(std::fabs(lhs - rhs) < 1e-12 * oracle::norm2(v) * oracle::norm2(w));
    }
}

TEST_CASE("csr_from_triplets: duplicates are summed, order normalized") {
    CsrMatrix a = csr_from_triplets(2, 2, {{1, 0, 2.0}, {0, 1, 1.0}, {1, 0, 3.0}, {0, 0, 4.0}});
    CHECK(a.row_ptr == std::vector<int>{0, 2, 3});
    CHECK(a.col_idx == std::vector<int>{0, 1, 0});
    CHECK(a.values == std::vector<double>{4.0, 1.0, 5.0});
}

TEST_CASE("validate_csr: rejects broken structures") {
    CsrMatrix a = csr_identity(2);
    a.col_idx[1] = 5;
    CHECK_THROWS_AS(validate_csr(a), std::invalid_argument);
    a = csr_identity(2);
    a.row_ptr = {0, 2, 1};
    CHECK_THROWS_AS(validate_csr(a), std::invalid_argument);
    a = csr_identity(2);
    a.values[0] = std::nan("");
    CHECK_THROWS_AS(validate_csr(a), std::invalid_argument);
}

TEST_CASE("ilu_factorize: diagonal matrix is its own factorization") {
    CsrMatrix a = csr_from_triplets(3, 3, {{0, 0, 2.0}, {1, 1, 3.0}, {2, 2, 4.0}});
    for (double tol : {0.0, 1e-4, 0.5}) {
        IluFactors f = ilu_factorize(a, tol);
        CHECK(f.lower.nnz() == 0);
        CHECK(f.upper.values == std::vector<double>{2.0, 3.0, 4.0});
        CHECK(f.upper.col_idx == std::vector<int>{0, 1, 2});
    }
}

TEST_CASE("ilu_factorize: complete factors of the second-difference matrix") {
    CsrMatrix a = tridiag(3, 1.0, -2.0, 1.0);
    IluFactors f = ilu_factorize(a, 0.0);
    REQUIRE(f.lower.values.size() == 2);
    CHECK(f.lower.values[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(f.lower.values[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
    REQUIRE(f.upper.row_ptr == std::vector<int>{0, 2, 4, 5});
    CHECK(f.upper.values[0] == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(f.upper.values[2] == doctest::Approx(-1.5).epsilon(1e-15));
    CHECK(f.upper.values[4] == doctest::Approx(-4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("ilu_factorize: zero drop tolerance reproduces the no-pivot dense LU") {
    CsrMatrix a = csr_from_triplets(50, 50, oracle::random_dd_triplets(50, 0.12, 404));
    IluFactors f = ilu_factorize(a, 0.0);

    auto [lo, uo] = oracle::lu_no_pivot(oracle::dense_of(a));
    oracle::Mat lg = oracle::dense_of(f.lower);
    for (int i = 0; i < 50; ++i) lg[i][i] = 1.0;
    oracle::Mat ug = oracle::dense_of(f.upper);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) {
            worst = std::max(worst, std::fabs(lg[i][j] - lo[i][j]));
            worst = std::max(worst, std::fabs(ug[i][j] - uo[i][j]));
        }
    CHECK(worst < 1e-10);

    oracle::Mat prod = oracle::matmul(lg, ug);
    oracle::Mat ad = oracle::dense_of(a);
    double res = 0.0;
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) res = std::max(res, std::fabs(prod[i][j] - ad[i][j]));
    CHECK(res < 1e-10);
}

TEST_CASE("ilu_factorize: rejects a zero pivot and names the row") {
    CsrMatrix a = csr_from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
    CHECK_THROWS_WITH_AS((void)ilu_factorize(a, 0.0),
                         doctest::Contains("row 0"), std::runtime_error);
}

TEST_CASE("ilu_factorize: dropped entries obey the relative threshold") {
    // Off-diagonal 1e-6 against row norm ~2: dropped at 1e-4, kept at 0.
    CsrMatrix a = csr_from_triplets(
        2, 2, {{0, 0, 2.0}, {0, 1, 1e-6}, {1, 0, 1e-6}, {1, 1, 2.0}});
    IluFactors kept = ilu_factorize(a, 0.0);
    CHECK(kept.lower.nnz() == 1);
    CHECK(kept.upper.nnz() == 3);
    IluFactors dropped = ilu_factorize(a, 1e-4);
    CHECK(dropped.lower.nnz() == 0);
    CHECK(dropped.upper.nnz() == 2);
}

TEST_CASE("ilu_factorize: deterministic across repeated calls") {
    CsrMatrix a = csr_from_triplets(40, 40, oracle::random_dd_triplets(40, 0.15, 9));
    IluFactors f1 = ilu_factorize(a, 1e-3);
    IluFactors f2 = ilu_factorize(a, 1e-3);
    CHECK(f1.lower.values == f2.lower.values);
    CHECK(f1.upper.values == f2.upper.values);
    CHECK(f1.upper.col_idx == f2.upper.col_idx);
}

TEST_CASE("triangular_solve: identity lower factor and a 2x2 upper solve") {
    IluFactors f;
    f.lower.n_rows = f.lower.n_cols = 3;
    f.lower.row_ptr = {0, 0, 0, 0};
    f.upper = csr_from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
    std::vector<double> y = triangular_solve(f, TriPart::lower, false, {1.0, 2.0, 3.0});
    CHECK(y == std::vector<double>{1.0, 2.0, 3.0});

    IluFactors g;
    g.lower.n_rows = g.lower.n_cols = 2;
    g.lower.row_ptr = {0, 0, 0};
    g.upper = csr_from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 1, 4.0}});
    std::vector<double> x = triangular_solve(g, TriPart::upper, false, {4.0, 8.0});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("triangular_solve: apply then solve round-trips in all four variants") {
    CsrMatrix a = csr_from_triplets(30, 30, oracle::random_dd_triplets(30, 0.2, 31));
    IluFactors f = ilu_factorize(a, 0.0);
    std::vector<double> x = oracle::random_vector(30, 5);
    for (TriPart part : {TriPart::lower, TriPart::upper}) {
        for (bool tr : {false, true}) {
            std::vector<double> rhs = apply_factor(f, part, tr, x);
            std::vector<double> back = triangular_solve(f, part, tr, rhs);
            CHECK(oracle::max_abs_diff(back, x) < 1e-10);
        }
    }
}

TEST_CASE("triangular_solve: zero upper diagonal is a solve failure") {
    IluFactors f;
    f.lower.n_rows = f.lower.n_cols = 2;
    f.lower.row_ptr = {0, 0, 0};
    f.upper.n_rows = f.upper.n_cols = 2;
    f.upper.row_ptr = {0, 1, 2};
    f.upper.col_idx = {0, 1};
    f.upper.values = {1.0, 0.0};
    CHECK_THROWS_AS((void)triangular_solve(f, TriPart::upper, false, {1.0, 1.0}),
                    std::runtime_error);
    CHECK_THROWS_AS((void)triangular_solve(f, TriPart::upper, true, {1.0, 1.0}),
                    std::runtime_error);
}

TEST_CASE("dense_lu_solve: pinned small systems") {
    DenseMatrix eye(1, 1);
    eye.at(0, 0) = 1.0;
    CHECK(dense_lu_solve(eye, {5.0}) == std::vector<double>{5.0});

    DenseMatrix d(2, 2);
    d.at(0, 0) = 2.0;
    d.at(1, 1) = 0.5;
    std::vector<double> x = dense_lu_solve(d, {2.0, 1.0});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("dense_lu_solve: random 100x100 residual stays tiny") {
    int n = 100;
    CsrMatrix a = csr_from_triplets(n, n, oracle::random_dd_triplets(n, 0.3, 1234));
    DenseMatrix d = csr_to_dense(a);
    std::vector<double> b = oracle::random_vector(n, 8);
    std::vector<double> x = dense_lu_solve(d, b);
    std::vector<double> ax = dense_matvec(d, x);
    double r = 0.0;
    for (int i = 0; i < n; ++i) r += (ax[i] - b[i]) * (ax[i] - b[i]);
    CHECK(std::sqrt(r) < 1e-10 * oracle::norm2(b));
}

TEST_CASE("dense_lu_solve: singular input and the size guard") {
    DenseMatrix s(2, 2);
    s.at(0, 0) = 1.0;
    s.at(0, 1) = 2.0;
    s.at(1, 0) = 2.0;
    s.at(1, 1) = 4.0;
    CHECK_THROWS_AS((void)dense_lu_solve(s, {1.0, 1.0}), std::runtime_error);

    DenseMatrix big;
    big.n_rows = big.n_cols = kDenseSizeCap + 1;
    CHECK_THROWS_AS((void)dense_lu_factor(big), std::invalid_argument);
}

TEST_CASE("dense_spectral_norm: diagonal and identity") {
    DenseMatrix d(2, 2);
    d.at(0, 0) = 2.0;
    d.at(1, 1) = 0.5;
    CHECK(dense_spectral_norm(d) == doctest::Approx(2.0).epsilon(1e-10));

    DenseMatrix eye(10, 10);
    for (int i = 0; i < 10; ++i) eye.at(i, i) = 1.0;
    CHECK(dense_spectral_norm(eye) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dense_spectral_norm: matches SVD on a random 30x30") {
    CsrMatrix a = csr_from_triplets(30, 30, oracle::random_dd_triplets(30, 0.4, 5150));
    double got = dense_spectral_norm(csr_to_dense(a));
    double want = oracle::svd_max_singular(oracle::dense_of(a));
    CHECK(oracle::rel_err(got, want) < 1e-8);
}

TEST_CASE("matrix market: write/read round-trip preserves the exact matrix") {
    namespace fs = std::filesystem;
    CsrMatrix a = csr_from_triplets(12, 9, {{0, 0, 1.5}, {3, 8, -2.25}, {11, 0, 1e-17}, {5, 4, 3.0}});
    fs::path p = fs::temp_directory_path() / "pcp_mm_roundtrip.mtx";
    mm_write(p.string(), a);
    CsrMatrix b = mm_read(p.string());
    CHECK(b.n_rows == a.n_rows);
    CHECK(b.n_cols == a.n_cols);
    CHECK(b.row_ptr == a.row_ptr);
    CHECK(b.col_idx == a.col_idx);
    CHECK(b.values == a.values);
    fs::remove(p);
}

TEST_CASE("matrix market: rejects a foreign header") {
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() / "pcp_mm_bad.mtx";
    {
        std::FILE* f = std::fopen(p.string().c_str(), "w");
        std::fputs("%%MatrixMarket matrix array real general\n1 1\n1.0\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS((void)mm_read(p.string()), std::runtime_error);
    fs::remove(p);
}

}  // TEST_SUITE
