#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "cmm/matrix.hpp"
#include "cmm/reference.hpp"
#include "test_util.hpp"

using namespace cmm;
using cmm_test::TempDir;

namespace {

using Triplet = std::tuple<std::size_t, std::size_t, double>;

std::set<Triplet> triplet_set(const SparseMatrix& m) {
  std::set<Triplet> out;
  const bool col_major = m.layout() == Layout::ColumnMajor;
  for (std::size_t k = 0; k < m.lines(); ++k) {
    auto idx = m.line_indices(k);
    auto val = m.line_values(k);
    for (std::size_t p = 0; p < idx.size(); ++p)
      out.insert(col_major ? Triplet{idx[p], k, val[p]} : Triplet{k, idx[p], val[p]});
  }
  return out;
}

}  // namespace

TEST_CASE("matrix market: 2x2 identity") {
  TempDir dir;
  const auto path = dir.write("id2.mtx",
                              "%%MatrixMarket matrix coordinate real general\n"
                              "2 2 2\n"
                              "1 1 1.0\n"
                              "2 2 1.0\n");
  const SparseMatrix m = load_matrix_market(path);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m.nnz() == 2);
  CHECK(m.to_dense()(0, 0) == 1.0);
  CHECK(m.to_dense()(1, 1) == 1.0);
}

TEST_CASE("matrix market: out-of-range index reports the line") {
  TempDir dir;
  const auto path = dir.write("bad.mtx",
                              "%%MatrixMarket matrix coordinate real general\n"
                              "3 3 1\n"
                              "4 1 2.0\n");
  CHECK_THROWS_WITH_AS(load_matrix_market(path), doctest::Contains(":3:"), parse_error);
}

TEST_CASE("matrix market: explicit zeros dropped") {
  TempDir dir;
  const auto path = dir.write("zeros.mtx",
                              "%%MatrixMarket matrix coordinate real general\n"
                              "% a comment line\n"
                              "4 4 7\n"
                              "1 1 3.0\n"
                              "2 3 -1.5\n"
                              "3 3 0.0\n"
                              "4 1 2.0\n"
                              "1 4 -7.0\n"
                              "2 2 4.25\n"
                              "4 4 1.0\n");
  const SparseMatrix m = load_matrix_market(path);
  CHECK(m.nnz() == 6);
}

TEST_CASE("matrix market: symmetric expansion") {
  TempDir dir;
  const auto path = dir.write("sym.mtx",
                              "%%MatrixMarket matrix coordinate real symmetric\n"
                              "3 3 3\n"
                              "1 1 2.0\n"
                              "2 1 5.0\n"
                              "3 2 -1.0\n");
  const SparseMatrix m = load_matrix_market(path);
  CHECK(m.nnz() == 5);
  const DenseMatrix d = m.to_dense();
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 0) == 5.0);
  CHECK(d(1, 2) == -1.0);
  CHECK(d(2, 1) == -1.0);
}

TEST_CASE("matrix market: array format (dense file, zero dropped)") {
  TempDir dir;
  const auto path = dir.write("arr.mtx",
                              "%%MatrixMarket matrix array real general\n"
                              "2 2\n"
                              "1.0\n0.0\n2.5\n-3.0\n");
  const SparseMatrix m = load_matrix_market(path);
  CHECK(m.nnz() == 3);
  const DenseMatrix d = m.to_dense();
  CHECK(d(0, 0) == 1.0);
  CHECK(d(1, 0) == 0.0);
  CHECK(d(0, 1) == 2.5);
  CHECK(d(1, 1) == -3.0);
}

TEST_CASE("matrix market: symmetric array format walks the lower triangle") {
  TempDir dir;
  const auto path = dir.write("symarr.mtx",
                              "%%MatrixMarket matrix array real symmetric\n"
                              "3 3\n"
                              "1.0\n2.0\n3.0\n4.0\n5.0\n6.0\n");
  const DenseMatrix d = load_matrix_market(path).to_dense();
  CHECK(d(0, 0) == 1.0);
  CHECK(d(1, 0) == 2.0);
  CHECK(d(0, 1) == 2.0);
  CHECK(d(2, 0) == 3.0);
  CHECK(d(1, 1) == 4.0);
  CHECK(d(2, 1) == 5.0);
  CHECK(d(1, 2) == 5.0);
  CHECK(d(2, 2) == 6.0);
}

TEST_CASE("matrix market: rejects non-real fields") {
  TempDir dir;
  const auto path = dir.write("pat.mtx",
                              "%%MatrixMarket matrix coordinate pattern general\n"
                              "2 2 1\n1 1\n");
  CHECK_THROWS_AS(load_matrix_market(path), parse_error);
  CHECK_THROWS_AS(load_matrix_market(dir.path("missing.mtx")), io_error);
}

TEST_CASE("matrix market: dimension overflow rejected") {
  TempDir dir;
  const auto path = dir.write("huge.mtx",
                              "%%MatrixMarket matrix coordinate real general\n"
                              "9999999999 9999999999 1\n1 1 1.0\n");
  CHECK_THROWS_WITH_AS(load_matrix_market(path), doctest::Contains("overflow"), parse_error);
}

TEST_CASE("layout round trip is the identity") {
  auto rng = cmm_test::make_rng(7);
  const SparseMatrix m = cmm_test::random_sparse(8, 8, 20, rng);
  const SparseMatrix rm = to_layout(m, Layout::RowMajor);
  const SparseMatrix back = to_layout(rm, Layout::ColumnMajor);
  CHECK(triplet_set(m) == triplet_set(rm));
  CHECK(triplet_set(m) == triplet_set(back));

  const SparseMatrix one = SparseMatrix::from_dense(DenseMatrix(1, 1, {2.0}));
  CHECK(triplet_set(to_layout(one, Layout::RowMajor)) == triplet_set(one));
}

TEST_CASE("random diagonal: nonzero, deterministic, integer-valued") {
  const DiagonalScaling d3 = random_diagonal(3, 11);
  CHECK(d3.length() == 3);
  for (double v : d3.entries) CHECK(v != 0.0);

  const DiagonalScaling again = random_diagonal(3, 11);
  CHECK(d3.entries == again.entries);

  const DiagonalScaling big = random_diagonal(10000, 5);
  double mn = big.entries.front();
  for (double v : big.entries) {
    mn = std::min(mn, v);
    CHECK(v == std::floor(v));
    CHECK(v <= 2147483647.0);
  }
  CHECK(mn > 0.0);

  CHECK_THROWS_AS(random_diagonal(0, 1), dim_error);
}

TEST_CASE("diagonal application matches the naive loop") {
  DiagonalScaling ones;
  ones.entries = {1.0, 1.0, 1.0};
  auto rng = cmm_test::make_rng(3);
  const DenseMatrix m = cmm_test::random_dense(3, 3, rng);
  CHECK(cmm_test::max_abs_diff(apply_diagonal_left(ones, m), m) == 0.0);

  const DenseMatrix z(4, 5);
  DiagonalScaling d4 = random_diagonal(4, 2);
  CHECK(frobenius_norm(apply_diagonal_left(d4, z)) == 0.0);

  const DenseMatrix r = cmm_test::random_dense(5, 5, rng);
  const DiagonalScaling dl = random_diagonal(5, 3);
  const DiagonalScaling dr = random_diagonal(5, 4);
  const DenseMatrix left = apply_diagonal_left(dl, r);
  const DenseMatrix right = apply_diagonal_right(r, dr);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(left(i, j) == dl.entries[i] * r(i, j));
      CHECK(right(i, j) == r(i, j) * dr.entries[j]);
    }

  CHECK_THROWS_AS(apply_diagonal_left(d4, r), dim_error);
}

TEST_CASE("diagonal scaling preserves sparsity patterns") {
  auto rng = cmm_test::make_rng(17);
  const SparseMatrix m = cmm_test::random_sparse(6, 6, 12, rng);
  const DiagonalScaling dl = random_diagonal(6, 21);
  const DiagonalScaling dr = random_diagonal(6, 22);
  const SparseMatrix scaled = apply_diagonal_right(apply_diagonal_left(dl, m), dr);
  CHECK(scaled.nnz() == m.nnz());

  // Pattern of D*A*B*D' matches the pattern of A*B on exact products.
  const SparseMatrix a = cmm_test::random_sparse(5, 5, 8, rng);
  const SparseMatrix b = cmm_test::random_sparse(5, 5, 8, rng);
  const DenseMatrix ab = reference::exact_product(a, b);
  const DenseMatrix scaled_ab = reference::exact_product(
      apply_diagonal_left(random_diagonal(5, 31), a),
      apply_diagonal_right(b, random_diagonal(5, 32)));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK((ab(i, j) == 0.0) == (scaled_ab(i, j) == 0.0));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), dim_error);
  CHECK_THROWS_AS(DenseMatrix(1, 1, {std::numeric_limits<double>::quiet_NaN()}), parse_error);
  // stored zero rejected
  CHECK_THROWS_AS(SparseMatrix(2, 2, Layout::ColumnMajor, {0, 1, 1}, {0}, {0.0}), dim_error);
  // unsorted indices rejected
  CHECK_THROWS_AS(SparseMatrix(3, 1, Layout::ColumnMajor, {0, 2}, {1, 0}, {1.0, 2.0}), dim_error);
}
