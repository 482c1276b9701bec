#include "cmm/recovery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "build_impl.hpp"

namespace cmm {

namespace {

constexpr std::uint64_t kRowCodeStream = (std::uint64_t(1) << 32) + 1;
constexpr std::uint64_t kColCodeStream = (std::uint64_t(1) << 32) + 2;

// Domains above this would need impractically large decode tables.
constexpr std::size_t kMaxCodeDomain = std::size_t(1) << 26;

}  // namespace

unsigned CodeWord::weight() const {
  return static_cast<unsigned>(std::popcount(lo) + std::popcount(hi));
}

unsigned hamming_distance(CodeWord a, CodeWord b) { return (a ^ b).weight(); }

CodeWord Code::encode_message(std::uint64_t msg) const {
  CodeWord w;
  while (msg != 0) {
    const unsigned q = static_cast<unsigned>(std::countr_zero(msg));
    msg &= msg - 1;
    w = w ^ columns_[q];
  }
  return w;
}

bool Code::syndrome_zero(const CodeWord& word) const {
  for (const CodeWord& check : checks_)
    if ((check & word).weight() & 1u) return false;
  return true;
}

std::size_t Code::message_of(const CodeWord& codeword) const {
  std::uint64_t msg = 0;
  for (unsigned r = 0; r < msg_bits_; ++r)
    if (codeword.get(pivots_[r])) msg ^= basis_to_msg_[r];
  if (msg < 1 || msg > domain_) return kNoCodeword;
  return static_cast<std::size_t>(msg - 1);
}

Code Code::build(std::size_t domain, std::uint32_t delta_num, std::uint32_t delta_den,
                 std::uint64_t seed, std::size_t length) {
  if (domain < 1) throw dim_error("code: domain must be >= 1");
  if (domain > kMaxCodeDomain) throw cap_error("code: domain too large for table decoding");
  if (delta_num == 0 || delta_den == 0 || delta_num >= delta_den)
    throw dim_error("code: delta must lie in (0, 1)");

  const unsigned msg_bits = static_cast<unsigned>(std::bit_width(domain));  // message = x+1
  std::size_t ell0 = length;
  if (ell0 == 0) {
    const unsigned ceil_lg = domain <= 1 ? 0 : static_cast<unsigned>(std::bit_width(domain - 1));
    ell0 = std::max<std::size_t>(8, 4 * static_cast<std::size_t>(ceil_lg));
  }
  constexpr std::size_t kMaxLength = 128;
  constexpr unsigned kAttemptsPerLength = 64;
  if (ell0 > kMaxLength) throw dim_error("code: length above 128 unsupported");

  for (std::size_t ell = std::max<std::size_t>(ell0, msg_bits); ell <= kMaxLength; ell += 4) {
    const std::size_t radius = ell * delta_num / delta_den;
    for (unsigned attempt = 0; attempt < kAttemptsPerLength; ++attempt) {
      std::mt19937_64 rng(derive_seed(seed, (static_cast<std::uint64_t>(ell) << 20) | attempt));
      std::vector<CodeWord> columns(msg_bits);
      for (CodeWord& c : columns) {
        c.lo = rng();
        if (ell < 64)
          c.lo &= (std::uint64_t(1) << ell) - 1;
        else if (ell > 64)
          c.hi = rng() & (ell == 128 ? ~std::uint64_t(0) : (std::uint64_t(1) << (ell - 64)) - 1);
      }

      // Row-reduce the generator (rows = columns of G) to certify full rank
      // and derive pivots, the RREF->message transform, and parity checks.
      std::vector<CodeWord> rref = columns;
      std::vector<std::uint64_t> transform(msg_bits);
      for (unsigned r = 0; r < msg_bits; ++r) transform[r] = std::uint64_t(1) << r;
      std::vector<std::size_t> pivots;
      unsigned rank = 0;
      for (std::size_t pos = 0; pos < ell && rank < msg_bits; ++pos) {
        unsigned pivot_row = rank;
        while (pivot_row < msg_bits && !rref[pivot_row].get(pos)) ++pivot_row;
        if (pivot_row == msg_bits) continue;
        std::swap(rref[rank], rref[pivot_row]);
        std::swap(transform[rank], transform[pivot_row]);
        for (unsigned q = 0; q < msg_bits; ++q) {
          if (q != rank && rref[q].get(pos)) {
            rref[q] = rref[q] ^ rref[rank];
            transform[q] ^= transform[rank];
          }
        }
        pivots.push_back(pos);
        ++rank;
      }
      if (rank < msg_bits) continue;

      // Certify the whole span: distance between any two distinct codewords
      // equals the weight of a nonzero-message codeword. Gray-code order
      // touches one generator column per step.
      bool distance_ok = true;
      {
        CodeWord current;
        const std::uint64_t total = std::uint64_t(1) << msg_bits;
        for (std::uint64_t z = 1; z < total; ++z) {
          current = current ^ columns[static_cast<unsigned>(std::countr_zero(z))];
          if (current.weight() <= 2 * radius) {
            distance_ok = false;
            break;
          }
        }
      }
      if (!distance_ok) continue;

      Code code;
      code.domain_ = domain;
      code.length_ = ell;
      code.delta_num_ = delta_num;
      code.delta_den_ = delta_den;
      code.radius_ = radius;
      code.seed_ = seed;
      code.msg_bits_ = msg_bits;
      code.columns_ = std::move(columns);
      code.pivots_ = std::move(pivots);
      code.basis_to_msg_ = std::move(transform);

      code.table_.resize(domain);
      for (std::size_t x = 0; x < domain; ++x)
        code.table_[x] = code.encode_message(static_cast<std::uint64_t>(x) + 1);

      code.checks_.reserve(ell - msg_bits);
      std::vector<bool> is_pivot(ell, false);
      for (std::size_t p : code.pivots_) is_pivot[p] = true;
      for (std::size_t q = 0; q < ell; ++q) {
        if (is_pivot[q]) continue;
        CodeWord check;
        check.set(q);
        for (unsigned r = 0; r < msg_bits; ++r)
          if (rref[r].get(q)) check.set(code.pivots_[r]);
        code.checks_.push_back(check);
      }
      return code;
    }
  }
  throw error("code construction failed: no seeded attempt certified the distance bound");
}

std::size_t Code::decode(const CodeWord& word) const {
  return decoder_ == Decoder::BitFlip ? decode_bit_flip(word) : decode_nearest(word);
}

std::size_t Code::decode_nearest(const CodeWord& word) const {
  if (domain_ == 1) return 0;  // the code carries no information
  for (std::size_t x = 0; x < domain_; ++x)
    if (hamming_distance(word, table_[x]) <= radius_) return x;
  return kNoCodeword;
}

std::size_t Code::decode_bit_flip(const CodeWord& word) const {
  if (domain_ == 1) return 0;
  if (syndrome_zero(word)) return message_of(word);
  std::vector<std::size_t> comb;
  for (std::size_t w = 1; w <= radius_; ++w) {
    comb.resize(w);
    for (std::size_t i = 0; i < w; ++i) comb[i] = i;
    while (true) {
      CodeWord cand = word;
      for (std::size_t pos : comb) cand.flip(pos);
      if (syndrome_zero(cand)) return message_of(cand);
      // next combination in lexicographic order
      std::size_t i = w;
      while (i > 0 && comb[i - 1] == length_ - w + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t q = i; q < w; ++q) comb[q] = comb[q - 1] + 1;
    }
  }
  return kNoCodeword;
}

Code build_code(std::size_t domain, std::uint64_t seed) { return Code::build(domain, 1, 8, seed); }

RecoverableSketch::RecoverableSketch(SketchSet base, Code row_code, Code col_code,
                                     std::vector<std::vector<std::vector<double>>> masked)
    : base_(std::move(base)),
      row_code_(std::move(row_code)),
      col_code_(std::move(col_code)),
      masked_(std::move(masked)) {
  if (row_code_.domain() != base_.n1() || col_code_.domain() != base_.n3())
    throw dim_error("recoverable sketch: code domains must match product dimensions");
  if (masked_.size() != base_.reps()) throw dim_error("recoverable sketch: repetition mismatch");
  const std::size_t nmask = row_code_.length() + col_code_.length();
  for (const auto& per_rep : masked_) {
    if (per_rep.size() != nmask) throw dim_error("recoverable sketch: family count mismatch");
    for (const auto& c : per_rep)
      if (c.size() != base_.buckets()) throw dim_error("recoverable sketch: length mismatch");
  }
}

namespace {

RecoverableSketch build_recoverable(const detail::LineSource& a, const detail::LineSource& b,
                                    SketchParams params, Code row_code, Code col_code,
                                    BuildStats* stats) {
  if (row_code.domain() != a.dim() || col_code.domain() != b.dim())
    throw dim_error("recoverable sketch: code domains must match product dimensions");
  const SketchParams effective = validate_params(params, a.dim(), b.dim());
  auto families = detail::make_families(effective);
  auto built =
      detail::build_families(a, b, families, &row_code, &col_code, effective.threads, stats);
  SketchSet base(a.dim(), a.lines(), b.dim(), effective, std::move(families),
                 std::move(built.unmasked));
  return RecoverableSketch(std::move(base), std::move(row_code), std::move(col_code),
                           std::move(built.masked));
}

}  // namespace

RecoverableSketch compressed_product_recoverable(const DenseMatrix& a, const DenseMatrix& b,
                                                 SketchParams params, Code row_code,
                                                 Code col_code, BuildStats* stats) {
  return build_recoverable(detail::LineSource::columns(a), detail::LineSource::rows(b), params,
                           std::move(row_code), std::move(col_code), stats);
}

RecoverableSketch compressed_product_recoverable(const SparseMatrix& a, const SparseMatrix& b,
                                                 SketchParams params, Code row_code,
                                                 Code col_code, BuildStats* stats) {
  return build_recoverable(detail::LineSource::columns(a), detail::LineSource::rows(b), params,
                           std::move(row_code), std::move(col_code), stats);
}

RecoverableSketch compressed_product_recoverable(const DenseMatrix& a, const DenseMatrix& b,
                                                 SketchParams params, BuildStats* stats) {
  return compressed_product_recoverable(
      a, b, params, build_code(a.rows(), derive_seed(params.seed, kRowCodeStream)),
      build_code(b.cols(), derive_seed(params.seed, kColCodeStream)), stats);
}

RecoverableSketch compressed_product_recoverable(const SparseMatrix& a, const SparseMatrix& b,
                                                 SketchParams params, BuildStats* stats) {
  return compressed_product_recoverable(
      a, b, params, build_code(a.rows(), derive_seed(params.seed, kRowCodeStream)),
      build_code(b.cols(), derive_seed(params.seed, kColCodeStream)), stats);
}

CandidateSet find_significant_entries(const RecoverableSketch& sk, double threshold) {
  if (!(threshold > 0.0)) throw dim_error("find_significant_entries: threshold must be positive");
  const SketchSet& base = sk.base();
  const std::size_t d = base.reps();
  const std::size_t b = base.buckets();
  const Code& row_code = sk.row_code();
  const Code& col_code = sk.col_code();
  const std::size_t ell_row = row_code.length();
  const std::size_t ell_col = col_code.length();
  const double half = threshold / 2.0;

  std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> counts;
  for (std::size_t t = 0; t < d; ++t) {
    for (std::size_t k = 0; k < b; ++k) {
      double max_mag = 0.0;
      CodeWord row_word, col_word;
      for (std::size_t r = 0; r < ell_row; ++r) {
        const double mag = std::abs(sk.masked(t, r)[k]);
        max_mag = std::max(max_mag, mag);
        if (mag > half) row_word.set(r);
      }
      for (std::size_t r = 0; r < ell_col; ++r) {
        const double mag = std::abs(sk.masked(t, ell_row + r)[k]);
        max_mag = std::max(max_mag, mag);
        if (mag > half) col_word.set(r);
      }
      if (max_mag <= half) continue;
      const std::size_t i = row_code.decode(row_word);
      if (i == Code::kNoCodeword) continue;
      const std::size_t j = col_code.decode(col_word);
      if (j == Code::kNoCodeword) continue;
      ++counts[{i, j}];
    }
  }

  CandidateSet out;
  out.threshold = threshold;
  for (const auto& [pos, count] : counts)
    if (2ull * count >= d) out.positions.push_back({pos.first, pos.second, count});
  return out;
}

std::vector<SparseEntry> extract_sparse_approx(const RecoverableSketch& sk, double threshold) {
  const CandidateSet candidates = find_significant_entries(sk, threshold);
  std::vector<SparseEntry> out;
  out.reserve(candidates.positions.size());
  for (const Candidate& c : candidates.positions) {
    const double value = sk.base().decompress_value(c.row, c.col);
    if (std::abs(value) > threshold / 2.0) out.push_back({c.row, c.col, value});
  }
  std::sort(out.begin(), out.end(), [](const SparseEntry& a, const SparseEntry& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  return out;
}

}  // namespace cmm
