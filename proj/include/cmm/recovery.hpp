#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cmm/sketch.hpp"

namespace cmm {

/// Bit string of length <= 128, enough for codeword lengths 4*lg(n) at any
/// practical domain size.
struct CodeWord {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool get(std::size_t r) const { return ((r < 64 ? lo >> r : hi >> (r - 64)) & 1) != 0; }
  void set(std::size_t r) { (r < 64 ? lo : hi) |= std::uint64_t(1) << (r < 64 ? r : r - 64); }
  void flip(std::size_t r) { (r < 64 ? lo : hi) ^= std::uint64_t(1) << (r < 64 ? r : r - 64); }

  friend CodeWord operator^(CodeWord a, CodeWord b) { return {a.lo ^ b.lo, a.hi ^ b.hi}; }
  friend CodeWord operator&(CodeWord a, CodeWord b) { return {a.lo & b.lo, a.hi & b.hi}; }
  friend bool operator==(CodeWord a, CodeWord b) { return a.lo == b.lo && a.hi == b.hi; }

  unsigned weight() const;
};

unsigned hamming_distance(CodeWord a, CodeWord b);

/// Injective map [n] -> {0,1}^ell with every pair of distinct codewords more
/// than 2*radius bits apart, so decoding within Hamming radius floor(delta*ell)
/// is unambiguous. Built as a seeded random linear code whose minimum
/// distance is certified exhaustively during construction.
class Code {
 public:
  static constexpr std::size_t kNoCodeword = static_cast<std::size_t>(-1);

  enum class Decoder : std::uint8_t { NearestCodeword = 0, BitFlip = 1 };

  Code() = default;

  /// length == 0 picks max(8, 4*ceil(lg n)). Throws cmm::error if no seed
  /// attempt certifies the distance bound after bounded retries.
  static Code build(std::size_t domain, std::uint32_t delta_num, std::uint32_t delta_den,
                    std::uint64_t seed, std::size_t length = 0);

  std::size_t domain() const { return domain_; }
  std::size_t length() const { return length_; }
  std::uint32_t delta_num() const { return delta_num_; }
  std::uint32_t delta_den() const { return delta_den_; }
  double delta() const { return static_cast<double>(delta_num_) / delta_den_; }
  std::size_t radius() const { return radius_; }
  std::uint64_t seed() const { return seed_; }

  Decoder decoder() const { return decoder_; }
  void set_decoder(Decoder d) { decoder_ = d; }

  CodeWord codeword(std::size_t x) const { return table_[x]; }
  bool bit(std::size_t x, std::size_t r) const { return table_[x].get(r); }

  /// Returns the unique x with dist(word, E(x)) <= radius, or kNoCodeword.
  std::size_t decode(const CodeWord& word) const;
  std::size_t decode_nearest(const CodeWord& word) const;

  /// Bounded-distance decoding by flipping up to `radius` bits until the
  /// syndrome vanishes. Agrees with decode_nearest whenever that succeeds;
  /// cost grows as C(length, radius), so it pays off only for short codes.
  std::size_t decode_bit_flip(const CodeWord& word) const;

 private:
  std::size_t domain_ = 0;
  std::size_t length_ = 0;
  std::uint32_t delta_num_ = 1, delta_den_ = 8;
  std::size_t radius_ = 0;
  std::uint64_t seed_ = 0;
  Decoder decoder_ = Decoder::NearestCodeword;

  unsigned msg_bits_ = 0;
  std::vector<CodeWord> columns_;      // generator columns, one per message bit
  std::vector<CodeWord> table_;        // codeword per domain element
  std::vector<CodeWord> checks_;       // parity checks (dual space rows)
  std::vector<std::size_t> pivots_;    // word positions carrying RREF coordinates
  std::vector<std::uint64_t> basis_to_msg_;  // row r: message mask for RREF coordinate r

  CodeWord encode_message(std::uint64_t msg) const;
  bool syndrome_zero(const CodeWord& word) const;
  std::size_t message_of(const CodeWord& codeword) const;  // kNoCodeword if not in [1..n]
};

/// Convenience wrapper with the default rate delta = 1/8.
Code build_code(std::size_t domain, std::uint64_t seed);

/// A SketchSet extended, per repetition, with one code-masked coefficient
/// vector per codeword bit of the row and column codes. Family r < ell_row
/// sketches the product with rows i of A zeroed where E_row(i)_r = 0;
/// families after that mask columns of B the same way.
class RecoverableSketch {
 public:
  RecoverableSketch() = default;
  RecoverableSketch(SketchSet base, Code row_code, Code col_code,
                    std::vector<std::vector<std::vector<double>>> masked);

  const SketchSet& base() const { return base_; }
  SketchSet& base() { return base_; }
  const Code& row_code() const { return row_code_; }
  const Code& col_code() const { return col_code_; }

  std::size_t masked_families() const { return row_code_.length() + col_code_.length(); }
  std::span<const double> masked(std::size_t t, std::size_t r) const { return masked_[t][r]; }
  void add_to_masked_bucket(std::size_t t, std::size_t r, std::size_t k, double delta) {
    masked_[t][r][k] += delta;
  }

 private:
  SketchSet base_;
  Code row_code_, col_code_;
  std::vector<std::vector<std::vector<double>>> masked_;  // d x (ell_row+ell_col) x b
};

RecoverableSketch compressed_product_recoverable(const DenseMatrix& a, const DenseMatrix& b,
                                                 SketchParams params, Code row_code,
                                                 Code col_code, BuildStats* stats = nullptr);
RecoverableSketch compressed_product_recoverable(const SparseMatrix& a, const SparseMatrix& b,
                                                 SketchParams params, Code row_code,
                                                 Code col_code, BuildStats* stats = nullptr);

/// Builds default 1/8-rate codes for both index domains from the sketch seed.
RecoverableSketch compressed_product_recoverable(const DenseMatrix& a, const DenseMatrix& b,
                                                 SketchParams params,
                                                 BuildStats* stats = nullptr);
RecoverableSketch compressed_product_recoverable(const SparseMatrix& a, const SparseMatrix& b,
                                                 SketchParams params,
                                                 BuildStats* stats = nullptr);

struct Candidate {
  std::size_t row = 0;
  std::size_t col = 0;
  std::uint32_t multiplicity = 0;
};

struct CandidateSet {
  double threshold = 0.0;
  std::vector<Candidate> positions;  // sorted by (row, col)
};

/// Decodes, for every repetition and bucket, which entry of magnitude above
/// the threshold hashed there, keeping positions seen in at least half of
/// the repetitions. Buckets whose masked magnitudes all stay at or below
/// threshold/2 are skipped: no entry of magnitude >= threshold can have
/// decoded cleanly from them.
CandidateSet find_significant_entries(const RecoverableSketch& sk, double threshold);

struct SparseEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Candidate positions decoded as above, valued via the unmasked sketch,
/// sorted by |value| descending (ties by position). Candidates whose
/// estimate stays at or below threshold/2 are dropped as spurious decodes.
std::vector<SparseEntry> extract_sparse_approx(const RecoverableSketch& sk, double threshold);

}  // namespace cmm
