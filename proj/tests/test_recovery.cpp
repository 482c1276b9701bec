#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "cmm/recovery.hpp"
#include "cmm/reference.hpp"
#include "test_util.hpp"

using namespace cmm;

namespace {

DenseMatrix mask_rows(const DenseMatrix& a, const Code& code, std::size_t r) {
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (!code.bit(i, r)) continue;
    for (std::size_t k = 0; k < a.cols(); ++k) out(i, k) = a(i, k);
  }
  return out;
}

DenseMatrix mask_cols(const DenseMatrix& b, const Code& code, std::size_t r) {
  DenseMatrix out(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    if (!code.bit(j, r)) continue;
    for (std::size_t k = 0; k < b.rows(); ++k) out(k, j) = b(k, j);
  }
  return out;
}

}  // namespace

TEST_CASE("code: single-element domain") {
  const Code c = build_code(1, 3);
  CHECK(c.domain() == 1);
  CodeWord junk;
  junk.lo = 0xA5A5;
  CHECK(c.decode(junk) == 0);
  CHECK(c.decode(CodeWord{}) == 0);
}

TEST_CASE("code: two codewords at delta=1/4, length 8 differ in at least 5 bits") {
  const Code c = Code::build(2, 1, 4, 11, 8);
  CHECK(c.length() == 8);
  CHECK(c.radius() == 2);
  CHECK(hamming_distance(c.codeword(0), c.codeword(1)) >= 5);
}

TEST_CASE("code: pairwise distances certified for n=100") {
  const Code c = build_code(100, 7);
  CHECK(c.length() == 28);  // 4 * ceil(lg 100)
  for (std::size_t x = 0; x < 100; ++x)
    for (std::size_t y = x + 1; y < 100; ++y)
      CHECK(hamming_distance(c.codeword(x), c.codeword(y)) > 2 * c.radius());
}

TEST_CASE("code: construction is deterministic and replayable at fixed length") {
  const Code a = build_code(50, 123);
  const Code b = build_code(50, 123);
  const Code c = Code::build(50, 1, 8, 123, a.length());
  for (std::size_t x = 0; x < 50; ++x) {
    CHECK(a.codeword(x) == b.codeword(x));
    CHECK(a.codeword(x) == c.codeword(x));
  }
  CHECK_THROWS_AS(Code::build(4, 0, 8, 1), dim_error);
  CHECK_THROWS_AS(Code::build(4, 8, 8, 1), dim_error);
  CHECK_THROWS_AS(Code::build(0, 1, 8, 1), dim_error);
}

TEST_CASE("decoding: clean and corrupted words") {
  const Code c = build_code(100, 7);
  for (std::size_t x = 0; x < 100; ++x) CHECK(c.decode_nearest(c.codeword(x)) == x);

  // flip exactly radius bits, all patterns for a few inputs
  for (std::size_t x : {0ul, 17ul, 99ul}) {
    for (std::size_t p = 0; p < c.length(); ++p)
      for (std::size_t q = p + 1; q < c.length(); ++q)
        for (std::size_t s = q + 1; s < c.length(); ++s) {
          CodeWord w = c.codeword(x);
          w.flip(p);
          w.flip(q);
          w.flip(s);
          CHECK(c.decode_nearest(w) == x);
        }
  }
}

TEST_CASE("decoder agreement, exhaustive at length 16") {
  const Code c = Code::build(16, 1, 8, 5, 16);
  REQUIRE(c.length() == 16);
  REQUIRE(c.radius() == 2);

  std::size_t no_codeword_seen = 0;
  for (std::uint64_t bits = 0; bits < (1u << 16); ++bits) {
    CodeWord w;
    w.lo = bits;
    const std::size_t nearest = c.decode_nearest(w);
    const std::size_t flipped = c.decode_bit_flip(w);
    CHECK(nearest == flipped);
    if (nearest == Code::kNoCodeword) ++no_codeword_seen;
  }
  CHECK(no_codeword_seen > 0);  // far words exist and are rejected

  // all flip patterns within the radius decode back
  for (std::size_t x = 0; x < 16; ++x)
    for (std::size_t p = 0; p < 16; ++p)
      for (std::size_t q = p + 1; q < 16; ++q) {
        CodeWord w = c.codeword(x);
        w.flip(p);
        w.flip(q);
        CHECK(c.decode_bit_flip(w) == x);
      }
}

TEST_CASE("decoder agreement, sampled at length 28") {
  const Code c = build_code(100, 9);
  auto rng = cmm_test::make_rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    CodeWord w;
    w.lo = rng() & ((std::uint64_t(1) << 28) - 1);
    CHECK(c.decode_nearest(w) == c.decode_bit_flip(w));
  }
}

TEST_CASE("masked families match the explicitly masked oracle") {
  auto rng = cmm_test::make_rng(21);
  const DenseMatrix a = cmm_test::random_int_dense(6, 6, rng);
  const DenseMatrix b = cmm_test::random_int_dense(6, 6, rng);
  SketchParams p;
  p.buckets = 16;
  p.reps = 2;
  p.seed = 2024;
  const RecoverableSketch rsk = compressed_product_recoverable(a, b, p);
  const SketchSet& base = rsk.base();
  const double tol = 1e-8 * std::max(1.0, frobenius_norm(a) * frobenius_norm(b));

  // unmasked family identical to the plain sketch with the same seed
  const SketchSet plain = compressed_product(a, b, p);
  for (std::uint32_t t = 0; t < 2; ++t) {
    auto x = base.coefficients(t);
    auto y = plain.coefficients(t);
    for (std::size_t z = 0; z < x.size(); ++z) CHECK(x[z] == y[z]);
  }

  const std::size_t ell_row = rsk.row_code().length();
  for (std::uint32_t t = 0; t < 2; ++t) {
    for (std::size_t r = 0; r < ell_row; ++r) {
      const DenseMatrix masked_a = mask_rows(a, rsk.row_code(), r);
      const auto oracle = reference::naive_countsketch(masked_a, b, base.families());
      auto got = rsk.masked(t, r);
      for (std::size_t z = 0; z < got.size(); ++z)
        CHECK(std::abs(got[z] - oracle[t][z]) <= tol);
    }
    for (std::size_t r = 0; r < rsk.col_code().length(); ++r) {
      const DenseMatrix masked_b = mask_cols(b, rsk.col_code(), r);
      const auto oracle = reference::naive_countsketch(a, masked_b, base.families());
      auto got = rsk.masked(t, ell_row + r);
      for (std::size_t z = 0; z < got.size(); ++z)
        CHECK(std::abs(got[z] - oracle[t][z]) <= tol);
    }
  }
}

TEST_CASE("mask plus complement equals the unmasked family") {
  auto rng = cmm_test::make_rng(22);
  const DenseMatrix a = cmm_test::random_int_dense(6, 6, rng);
  const DenseMatrix b = cmm_test::random_int_dense(6, 6, rng);
  SketchParams p;
  p.buckets = 16;
  p.reps = 2;
  p.seed = 4096;
  const RecoverableSketch rsk = compressed_product_recoverable(a, b, p);
  const double tol = 1e-8 * std::max(1.0, frobenius_norm(a) * frobenius_norm(b));

  for (std::uint32_t t = 0; t < 2; ++t)
    for (std::size_t r = 0; r < rsk.row_code().length(); ++r) {
      // complement family computed from the oracle on the bit-flipped mask
      DenseMatrix complement_a(6, 6);
      for (std::size_t i = 0; i < 6; ++i)
        if (!rsk.row_code().bit(i, r))
          for (std::size_t k = 0; k < 6; ++k) complement_a(i, k) = a(i, k);
      const auto complement =
          reference::naive_countsketch(complement_a, b, rsk.base().families());
      auto masked = rsk.masked(t, r);
      auto unmasked = rsk.base().coefficients(t);
      for (std::size_t z = 0; z < masked.size(); ++z)
        CHECK(std::abs(masked[z] + complement[t][z] - unmasked[z]) <= tol);
    }
}

TEST_CASE("trivial mask columns behave as identity or zero") {
  // With two codewords of length 8, some bit positions are set in both and
  // some in neither, with overwhelming probability over seeds; find one seed
  // exhibiting both and check the corresponding families.
  const DenseMatrix a(2, 2, {3.0, 0.0, -1.0, 2.0});
  const DenseMatrix b(2, 2, {1.0, 4.0, 0.0, 2.0});
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const Code row = Code::build(2, 1, 4, seed, 8);
    const Code col = Code::build(2, 1, 4, seed + 1000, 8);
    std::size_t ones_bit = row.length(), zeros_bit = row.length();
    for (std::size_t r = 0; r < row.length(); ++r) {
      if (row.bit(0, r) && row.bit(1, r)) ones_bit = r;
      if (!row.bit(0, r) && !row.bit(1, r)) zeros_bit = r;
    }
    if (ones_bit == row.length() || zeros_bit == row.length()) continue;

    SketchParams p;
    p.buckets = 8;
    p.reps = 2;
    p.seed = seed;
    const RecoverableSketch rsk = compressed_product_recoverable(a, b, p, row, col);
    for (std::uint32_t t = 0; t < 2; ++t) {
      auto all_ones = rsk.masked(t, ones_bit);
      auto unmasked = rsk.base().coefficients(t);
      for (std::size_t z = 0; z < 8; ++z)
        CHECK(all_ones[z] == doctest::Approx(unmasked[z]).epsilon(1e-12));
      auto all_zeros = rsk.masked(t, zeros_bit);
      for (std::size_t z = 0; z < 8; ++z) CHECK(std::abs(all_zeros[z]) <= 1e-12);
    }
    return;
  }
  FAIL("no seed produced both an all-ones and an all-zeros code column");
}

TEST_CASE("find_significant_entries: zero product and bad threshold") {
  SketchParams p;
  p.buckets = 16;
  p.reps = 4;
  p.seed = 5;
  const RecoverableSketch rsk =
      compressed_product_recoverable(DenseMatrix(4, 4), DenseMatrix(4, 4), p);
  const CandidateSet empty = find_significant_entries(rsk, 1.0);
  CHECK(empty.positions.empty());
  CHECK(extract_sparse_approx(rsk, 1.0).empty());
  CHECK_THROWS_AS(find_significant_entries(rsk, 0.0), dim_error);
}

TEST_CASE("find_significant_entries locates a single heavy entry") {
  DenseMatrix a(8, 8), b(8, 8);
  a(0, 0) = 100.0;
  b(0, 0) = 1.0;
  int hits = 0;
  for (int trial = 0; trial < 50; ++trial) {
    SketchParams p;
    p.buckets = 64;
    p.reps = 0;  // default
    p.seed = 9000 + trial;
    const RecoverableSketch rsk = compressed_product_recoverable(a, b, p);
    const CandidateSet cands = find_significant_entries(rsk, 10.0);
    if (cands.positions.size() == 1 && cands.positions[0].row == 0 &&
        cands.positions[0].col == 0)
      ++hits;

    const auto entries = extract_sparse_approx(rsk, 10.0);
    if (!entries.empty()) {
      CHECK(entries[0].row == 0);
      CHECK(entries[0].col == 0);
      CHECK(entries[0].value == doctest::Approx(100.0).epsilon(1e-9));
    }
  }
  CHECK(hits >= 48);
}

TEST_CASE("candidate sets never exceed 2b distinct positions") {
  auto rng = cmm_test::make_rng(23);
  const DenseMatrix a = cmm_test::random_dense(16, 16, rng);
  const DenseMatrix b = cmm_test::random_dense(16, 16, rng);
  SketchParams p;
  p.buckets = 8;
  p.reps = 2;
  p.seed = 31337;
  const RecoverableSketch rsk = compressed_product_recoverable(a, b, p);
  // tiny threshold: every bucket participates, decoding mostly junk
  const CandidateSet cands = find_significant_entries(rsk, 1e-9);
  CHECK(cands.positions.size() <= 2 * 8);
  for (const Candidate& c : cands.positions) CHECK(2u * c.multiplicity >= p.reps);
}

TEST_CASE("extract_sparse_approx recovers exactly sparse products") {
  auto rng = cmm_test::make_rng(24);
  int good = 0;
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix s(16, 16);
    for (int e = 0; e < 4; ++e)
      s(rng() % 16, rng() % 16) = static_cast<double>(1 + rng() % 9) * (rng() & 1 ? 1 : -1);
    DenseMatrix b(16, 16);
    for (std::size_t k = 0; k < 16; ++k) b(k, k) = 1.0;

    SketchParams p;
    p.buckets = 64;
    p.reps = 12;
    p.seed = 7000 + trial;
    const RecoverableSketch rsk = compressed_product_recoverable(s, b, p);
    const auto entries = extract_sparse_approx(rsk, 0.5);

    std::vector<std::tuple<std::size_t, std::size_t, double>> expected, got;
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j)
        if (s(i, j) != 0.0) expected.push_back({i, j, s(i, j)});
    for (const auto& e : entries) got.push_back({e.row, e.col, std::round(e.value)});
    std::sort(expected.begin(), expected.end());
    std::sort(got.begin(), got.end());
    if (expected == got) ++good;
  }
  CHECK(good >= 19);
}

TEST_CASE("extraction output is sorted by magnitude") {
  DenseMatrix a(8, 8), b(8, 8);
  a(1, 2) = 50.0;
  a(3, 4) = -80.0;
  a(5, 6) = 20.0;
  for (std::size_t k = 0; k < 8; ++k) b(k, k) = 1.0;
  SketchParams p;
  p.buckets = 128;
  p.reps = 18;
  p.seed = 12;
  const auto entries = extract_sparse_approx(compressed_product_recoverable(a, b, p), 5.0);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].row == 3);
  CHECK(entries[1].row == 1);
  CHECK(entries[2].row == 5);
}
