#pragma once

#include <cstdint>
#include <vector>

#include "cmm/errors.hpp"

namespace cmm {

// Field arithmetic over Z_p with the Mersenne prime p = 2^61 - 1.
inline constexpr std::uint64_t kMersenne61 = (std::uint64_t(1) << 61) - 1;

inline std::uint64_t reduce61(std::uint64_t x) {
  // valid for x < 2^63
  x = (x & kMersenne61) + (x >> 61);
  if (x >= kMersenne61) x -= kMersenne61;
  return x;
}

inline std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  const auto lo = static_cast<std::uint64_t>(p) & kMersenne61;
  const auto hi = static_cast<std::uint64_t>(p >> 61);
  return reduce61(lo + hi);
}

/// SplitMix64 finalizer, used to derive per-repetition seeds from a master
/// seed. Fixed algorithm so serialized sketches rebuild identically.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/// Degree-(k-1) polynomial over Z_p, giving a k-wise independent hash.
/// Outputs are reduced to a power-of-two range by masking low bits (bias
/// <= range/p) or to a sign by the lowest bit.
class PolyHash {
 public:
  PolyHash() = default;
  explicit PolyHash(std::vector<std::uint64_t> coefficients)
      : coeff_(std::move(coefficients)) {}

  /// Draws degree+1 coefficients uniformly from the field.
  template <class Rng>
  static PolyHash random(Rng& rng, unsigned degree) {
    std::vector<std::uint64_t> c(degree + 1);
    for (auto& v : c) {
      do {
        v = rng() >> 3;  // 61 bits
      } while (v >= kMersenne61);
    }
    return PolyHash(std::move(c));
  }

  std::uint64_t eval(std::uint64_t x) const {
    x = reduce61(x);
    std::uint64_t acc = 0;
    for (auto it = coeff_.rbegin(); it != coeff_.rend(); ++it)
      acc = reduce61(mulmod61(acc, x) + *it);
    return acc;
  }

  unsigned degree() const { return static_cast<unsigned>(coeff_.size()) - 1; }

 private:
  std::vector<std::uint64_t> coeff_;
};

enum class SignIndependence : std::uint8_t { TwoWise = 0, FourWise = 1 };

/// The decomposable count-sketch hash pair: 3-wise independent splitting
/// functions h1, h2 into b buckets and sign functions s1, s2, combined as
/// h(i,j) = (h1(i) + h2(j)) mod b and s(i,j) = s1(i)*s2(j).
class PairHashFamily {
 public:
  PairHashFamily() = default;
  PairHashFamily(std::uint64_t seed, std::uint32_t buckets, SignIndependence si);

  std::uint32_t buckets() const { return buckets_; }
  SignIndependence sign_independence() const { return sign_independence_; }
  std::uint64_t seed() const { return seed_; }

  std::uint32_t bucket1(std::uint64_t i) const {
    return static_cast<std::uint32_t>(h1_.eval(i)) & mask_;
  }
  std::uint32_t bucket2(std::uint64_t j) const {
    return static_cast<std::uint32_t>(h2_.eval(j)) & mask_;
  }
  std::uint32_t split(std::uint64_t i, std::uint64_t j) const {
    return (bucket1(i) + bucket2(j)) & mask_;
  }

  int sign1(std::uint64_t i) const { return 1 - 2 * static_cast<int>(s1_.eval(i) & 1); }
  int sign2(std::uint64_t j) const { return 1 - 2 * static_cast<int>(s2_.eval(j) & 1); }
  int sign(std::uint64_t i, std::uint64_t j) const { return sign1(i) * sign2(j); }

 private:
  PolyHash h1_, h2_, s1_, s2_;
  std::uint32_t buckets_ = 0;
  std::uint32_t mask_ = 0;
  SignIndependence sign_independence_ = SignIndependence::TwoWise;
  std::uint64_t seed_ = 0;
};

/// Validates that b is a power of two >= 2 and builds the family. The four
/// polynomials draw their coefficients from one seeded stream in a fixed
/// order, so equal seeds give bitwise-equal families on every platform.
PairHashFamily new_pair_family(std::uint64_t seed, std::uint32_t buckets, SignIndependence si);

/// Independent sign pair for AMS sketches (no splitting function).
struct SignPair {
  PolyHash s1, s2;

  int sign1(std::uint64_t i) const { return 1 - 2 * static_cast<int>(s1.eval(i) & 1); }
  int sign2(std::uint64_t j) const { return 1 - 2 * static_cast<int>(s2.eval(j) & 1); }
};

SignPair new_sign_pair(std::uint64_t seed, SignIndependence si);

}  // namespace cmm
