#include "cmm/hashing.hpp"

#include <bit>
#include <random>

namespace cmm {

PairHashFamily::PairHashFamily(std::uint64_t seed, std::uint32_t buckets, SignIndependence si)
    : buckets_(buckets), mask_(buckets - 1), sign_independence_(si), seed_(seed) {
  std::mt19937_64 rng(seed);
  const unsigned sign_degree = si == SignIndependence::FourWise ? 3 : 1;
  h1_ = PolyHash::random(rng, 2);
  h2_ = PolyHash::random(rng, 2);
  s1_ = PolyHash::random(rng, sign_degree);
  s2_ = PolyHash::random(rng, sign_degree);
}

PairHashFamily new_pair_family(std::uint64_t seed, std::uint32_t buckets, SignIndependence si) {
  if (buckets < 2 || !std::has_single_bit(buckets))
    throw dim_error("bucket count must be a power of two >= 2");
  return PairHashFamily(seed, buckets, si);
}

SignPair new_sign_pair(std::uint64_t seed, SignIndependence si) {
  std::mt19937_64 rng(seed);
  const unsigned sign_degree = si == SignIndependence::FourWise ? 3 : 1;
  SignPair p;
  p.s1 = PolyHash::random(rng, sign_degree);
  p.s2 = PolyHash::random(rng, sign_degree);
  return p;
}

}  // namespace cmm
