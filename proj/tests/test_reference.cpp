#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cmm/reference.hpp"
#include "test_util.hpp"

using namespace cmm;
using namespace cmm::reference;

TEST_CASE("exact product basics") {
  DenseMatrix id(3, 3);
  for (std::size_t i = 0; i < 3; ++i) id(i, i) = 1.0;
  CHECK(cmm_test::max_abs_diff(exact_product(id, id), id) == 0.0);

  const DenseMatrix a(2, 2, {1, 2, 3, 4});
  const DenseMatrix b(2, 2, {5, 6, 7, 8});
  const DenseMatrix ab = exact_product(a, b);
  CHECK(ab(0, 0) == 19.0);
  CHECK(ab(0, 1) == 22.0);
  CHECK(ab(1, 0) == 43.0);
  CHECK(ab(1, 1) == 50.0);

  const DenseMatrix z(2, 3);
  CHECK(frobenius_norm(exact_product(a, exact_product(b, z))) == 0.0);

  CHECK_THROWS_AS(exact_product(a, DenseMatrix(3, 2)), dim_error);
  CHECK_THROWS_AS(exact_product(a, b, /*entry_cap=*/2), cap_error);
}

TEST_CASE("exact product commutes with diagonal scalings") {
  auto rng = cmm_test::make_rng(5);
  const DenseMatrix a = cmm_test::random_dense(4, 6, rng);
  const DenseMatrix b = cmm_test::random_dense(6, 5, rng);
  const DiagonalScaling dl = random_diagonal(4, 1);
  const DiagonalScaling dr = random_diagonal(5, 2);
  const DenseMatrix scaled = exact_product(apply_diagonal_left(dl, a), apply_diagonal_right(b, dr));
  const DenseMatrix plain = exact_product(a, b);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const double expected = dl.entries[i] * plain(i, j) * dr.entries[j];
      CHECK(std::abs(scaled(i, j) - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
    }
}

TEST_CASE("err_f_k") {
  DenseMatrix m(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = 2.0;
  m(2, 2) = 1.0;
  CHECK(err_f_k(m, 0) == doctest::Approx(14.0));
  CHECK(err_f_k(m, 1) == doctest::Approx(5.0));
  CHECK(err_f_k(m, 9) == 0.0);
  CHECK(err_f_k(m, 100) == 0.0);

  auto rng = cmm_test::make_rng(8);
  const DenseMatrix r = cmm_test::random_dense(6, 6, rng);
  double prev = err_f_k(r, 0);
  CHECK(prev == doctest::Approx(frobenius_norm(r) * frobenius_norm(r)));
  for (std::size_t k = 1; k <= 36; ++k) {
    const double cur = err_f_k(r, k);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("exact covariance") {
  DenseMatrix constant(3, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 4; ++c) constant(i, c) = 2.5;
  CHECK(frobenius_norm(exact_covariance(constant)) == 0.0);

  const DenseMatrix two_obs(1, 2, {0.0, 2.0});
  CHECK(exact_covariance(two_obs)(0, 0) == doctest::Approx(2.0));

  auto rng = cmm_test::make_rng(9);
  const DenseMatrix data = cmm_test::random_dense(6, 12, rng);
  const DenseMatrix q = exact_covariance(data);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(q(i, j) == doctest::Approx(q(j, i)).epsilon(1e-12));
  CHECK(cmm_test::jacobi_min_eigenvalue(q) >= -1e-9);

  CHECK_THROWS_AS(exact_covariance(DenseMatrix(3, 1)), dim_error);
}

TEST_CASE("naive count sketch cross-checked by a per-outer-product loop") {
  auto rng = cmm_test::make_rng(12);
  const DenseMatrix a = cmm_test::random_int_dense(8, 8, rng);
  const DenseMatrix b = cmm_test::random_int_dense(8, 8, rng);

  std::vector<PairHashFamily> families;
  for (std::uint64_t t = 0; t < 3; ++t)
    families.push_back(new_pair_family(100 + t, 16, SignIndependence::TwoWise));

  const auto coeff = naive_countsketch(a, b, families);
  REQUIRE(coeff.size() == 3);

  // Independent route: accumulate s(i,j)*A_ik*B_kj per outer product without
  // forming AB.
  for (std::size_t t = 0; t < families.size(); ++t) {
    const PairHashFamily& f = families[t];
    std::vector<double> direct(16, 0.0);
    for (std::size_t k = 0; k < 8; ++k)
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
          direct[f.split(i, j)] += f.sign(i, j) * a(i, k) * b(k, j);
    for (std::size_t z = 0; z < 16; ++z)
      CHECK(coeff[t][z] == doctest::Approx(direct[z]).epsilon(1e-9));
  }

  const auto zero_coeff = naive_countsketch(DenseMatrix(8, 8), b, families);
  for (const auto& c : zero_coeff)
    for (double v : c) CHECK(v == 0.0);
}
