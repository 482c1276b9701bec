#include "cmm/sketch.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <thread>

#include "cmm/fft.hpp"
#include "build_impl.hpp"

namespace cmm {

std::uint32_t default_reps(std::size_t n1, std::size_t n3) {
  const std::size_t n = std::max(n1, n3);
  const auto ceil_lg = n <= 1 ? 0u : static_cast<unsigned>(std::bit_width(n - 1));
  return std::max(1u, 6u * ceil_lg);
}

SketchParams validate_params(SketchParams p, std::size_t n1, std::size_t n3) {
  if (p.buckets < 2) p.buckets = 2;
  if (p.buckets > (std::uint32_t(1) << 30)) throw dim_error("bucket count above 2^30");
  p.buckets = std::bit_ceil(p.buckets);
  if (p.reps == 0) p.reps = default_reps(n1, n3);
  if (p.threads == 0) p.threads = std::max(1u, std::thread::hardware_concurrency());
  return p;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw dim_error("median of empty set");
  const std::size_t d = values.size();
  const std::size_t mid = d / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  if (d % 2 == 1) return values[mid];
  const double upper = values[mid];
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

namespace detail {

std::vector<PairHashFamily> make_families(const SketchParams& effective) {
  std::vector<PairHashFamily> fams;
  fams.reserve(effective.reps);
  for (std::uint32_t t = 0; t < effective.reps; ++t)
    fams.push_back(new_pair_family(derive_seed(effective.seed, t), effective.buckets,
                                   effective.sign_independence));
  return fams;
}

namespace {

struct Scratch {
  // One polynomial block per unmasked/masked variant, flattened.
  std::vector<std::complex<double>> pa, pb, acc;
  std::vector<std::uint32_t> bucket1, bucket2;
  std::vector<double> sign1, sign2;

  std::size_t bytes() const {
    return (pa.capacity() + pb.capacity() + acc.capacity()) * sizeof(std::complex<double>) +
           (bucket1.capacity() + bucket2.capacity()) * sizeof(std::uint32_t) +
           (sign1.capacity() + sign2.capacity()) * sizeof(double);
  }
};

void fill_polynomials(const LineSource& src, std::size_t k, const Code* code,
                      std::span<const std::uint32_t> buckets, std::span<const double> signs,
                      std::complex<double>* poly, std::size_t b, std::size_t nmask) {
  std::fill(poly, poly + (1 + nmask) * b, std::complex<double>{});
  src.for_each(k, [&](std::size_t idx, double value) {
    const std::uint32_t slot = buckets[idx];
    const double sv = signs[idx] * value;
    poly[slot] += sv;
    if (nmask == 0) return;
    CodeWord w = code->codeword(idx);
    std::uint64_t bits = w.lo;
    while (bits != 0) {
      const unsigned r = static_cast<unsigned>(std::countr_zero(bits));
      bits &= bits - 1;
      poly[(1 + r) * b + slot] += sv;
    }
    bits = w.hi;
    while (bits != 0) {
      const unsigned r = 64 + static_cast<unsigned>(std::countr_zero(bits));
      bits &= bits - 1;
      poly[(1 + r) * b + slot] += sv;
    }
  });
}

}  // namespace

FamilyBuild build_families(const LineSource& a, const LineSource& b,
                           const std::vector<PairHashFamily>& families, const Code* row_code,
                           const Code* col_code, unsigned threads, BuildStats* stats) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.lines() != b.lines()) throw dim_error("compressed_product: inner dimensions disagree");
  const std::size_t d = families.size();
  const std::size_t nbuckets = families.front().buckets();
  const std::size_t n2 = a.lines();
  const std::size_t ell_row = row_code ? row_code->length() : 0;
  const std::size_t ell_col = col_code ? col_code->length() : 0;
  const std::size_t nfam = 1 + ell_row + ell_col;

  FamilyBuild out;
  out.unmasked.assign(d, std::vector<double>(nbuckets, 0.0));
  out.masked.assign(d, {});
  if (nfam > 1)
    for (auto& per_rep : out.masked)
      per_rep.assign(ell_row + ell_col, std::vector<double>(nbuckets, 0.0));

  const unsigned nthreads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(d)));
  std::atomic<std::size_t> aux_bytes{0};

  auto worker = [&](std::size_t t_begin, std::size_t t_end) {
    Fft fft(nbuckets);
    Scratch s;
    s.pa.resize((1 + ell_row) * nbuckets);
    s.pb.resize((1 + ell_col) * nbuckets);
    s.acc.resize(nfam * nbuckets);
    s.bucket1.resize(a.dim());
    s.sign1.resize(a.dim());
    s.bucket2.resize(b.dim());
    s.sign2.resize(b.dim());

    for (std::size_t t = t_begin; t < t_end; ++t) {
      const PairHashFamily& fam = families[t];
      for (std::size_t i = 0; i < a.dim(); ++i) {
        s.bucket1[i] = fam.bucket1(i);
        s.sign1[i] = fam.sign1(i);
      }
      for (std::size_t j = 0; j < b.dim(); ++j) {
        s.bucket2[j] = fam.bucket2(j);
        s.sign2[j] = fam.sign2(j);
      }
      std::fill(s.acc.begin(), s.acc.end(), std::complex<double>{});

      for (std::size_t k = 0; k < n2; ++k) {
        if (a.line_empty(k) || b.line_empty(k)) continue;
        fill_polynomials(a, k, row_code, s.bucket1, s.sign1, s.pa.data(), nbuckets, ell_row);
        fill_polynomials(b, k, col_code, s.bucket2, s.sign2, s.pb.data(), nbuckets, ell_col);
        for (std::size_t f = 0; f <= ell_row; ++f) fft.forward(s.pa.data() + f * nbuckets);
        for (std::size_t f = 0; f <= ell_col; ++f) fft.forward(s.pb.data() + f * nbuckets);

        const std::complex<double>* pa0 = s.pa.data();
        const std::complex<double>* pb0 = s.pb.data();
        for (std::size_t z = 0; z < nbuckets; ++z) s.acc[z] += pa0[z] * pb0[z];
        for (std::size_t r = 0; r < ell_row; ++r) {
          const std::complex<double>* par = s.pa.data() + (1 + r) * nbuckets;
          std::complex<double>* accr = s.acc.data() + (1 + r) * nbuckets;
          for (std::size_t z = 0; z < nbuckets; ++z) accr[z] += par[z] * pb0[z];
        }
        for (std::size_t r = 0; r < ell_col; ++r) {
          const std::complex<double>* pbr = s.pb.data() + (1 + r) * nbuckets;
          std::complex<double>* accr = s.acc.data() + (1 + ell_row + r) * nbuckets;
          for (std::size_t z = 0; z < nbuckets; ++z) accr[z] += pa0[z] * pbr[z];
        }
      }

      for (std::size_t f = 0; f < nfam; ++f) {
        std::complex<double>* block = s.acc.data() + f * nbuckets;
        fft.inverse(block);
        std::vector<double>& dst = f == 0 ? out.unmasked[t] : out.masked[t][f - 1];
        for (std::size_t z = 0; z < nbuckets; ++z) dst[z] = block[z].real();
      }
    }
    aux_bytes.fetch_add(s.bytes(), std::memory_order_relaxed);
  };

  if (nthreads == 1) {
    worker(0, d);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    const std::size_t chunk = (d + nthreads - 1) / nthreads;
    for (unsigned w = 0; w < nthreads; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min<std::size_t>(d, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  if (stats != nullptr) {
    std::size_t coeff_bytes = d * nfam * nbuckets * sizeof(double);
    stats->aux_bytes = aux_bytes.load() + coeff_bytes;
    stats->wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

}  // namespace detail

SketchSet::SketchSet(std::size_t n1, std::size_t n2, std::size_t n3, SketchParams effective,
                     std::vector<PairHashFamily> families, std::vector<std::vector<double>> coeff)
    : n1_(n1), n2_(n2), n3_(n3), params_(effective), families_(std::move(families)),
      coeff_(std::move(coeff)) {
  if (families_.size() != params_.reps || coeff_.size() != params_.reps)
    throw dim_error("sketch: repetition count mismatch");
  for (const auto& c : coeff_)
    if (c.size() != params_.buckets) throw dim_error("sketch: coefficient length mismatch");
}

SketchSet SketchSet::from_parts(std::size_t n1, std::size_t n2, std::size_t n3,
                                SketchParams effective, std::vector<std::vector<double>> coeff) {
  return SketchSet(n1, n2, n3, effective, detail::make_families(effective), std::move(coeff));
}

double SketchSet::decompress_value(std::size_t i, std::size_t j) const {
  if (i >= n1_ || j >= n3_) throw dim_error("decompress: index out of range");
  std::vector<double> xs(params_.reps);
  for (std::uint32_t t = 0; t < params_.reps; ++t) {
    const PairHashFamily& f = families_[t];
    xs[t] = f.sign(i, j) * coeff_[t][f.split(i, j)];
  }
  return median_of(std::move(xs));
}

EntryEstimate SketchSet::decompress(std::size_t i, std::size_t j) const {
  if (i >= n1_ || j >= n3_) throw dim_error("decompress: index out of range");
  EntryEstimate e;
  e.per_repetition.resize(params_.reps);
  for (std::uint32_t t = 0; t < params_.reps; ++t) {
    const PairHashFamily& f = families_[t];
    e.per_repetition[t] = f.sign(i, j) * coeff_[t][f.split(i, j)];
  }
  e.value = median_of(e.per_repetition);
  return e;
}

DenseMatrix SketchSet::decompress_all(std::size_t entry_cap) const {
  if (n1_ * n3_ > entry_cap)
    throw cap_error("decompress_all: " + std::to_string(n1_ * n3_) +
                    " entries exceed the memory cap");
  const std::uint32_t d = params_.reps;
  std::vector<std::uint32_t> b1(d * n1_), b2(d * n3_);
  std::vector<double> s1(d * n1_), s2(d * n3_);
  for (std::uint32_t t = 0; t < d; ++t) {
    const PairHashFamily& f = families_[t];
    for (std::size_t i = 0; i < n1_; ++i) {
      b1[t * n1_ + i] = f.bucket1(i);
      s1[t * n1_ + i] = f.sign1(i);
    }
    for (std::size_t j = 0; j < n3_; ++j) {
      b2[t * n3_ + j] = f.bucket2(j);
      s2[t * n3_ + j] = f.sign2(j);
    }
  }
  const std::uint32_t mask = params_.buckets - 1;
  DenseMatrix out(n1_, n3_);
  std::vector<double> xs(d);
  for (std::size_t i = 0; i < n1_; ++i) {
    for (std::size_t j = 0; j < n3_; ++j) {
      for (std::uint32_t t = 0; t < d; ++t) {
        const std::uint32_t k = (b1[t * n1_ + i] + b2[t * n3_ + j]) & mask;
        xs[t] = s1[t * n1_ + i] * s2[t * n3_ + j] * coeff_[t][k];
      }
      out(i, j) = median_of(xs);
    }
  }
  return out;
}

namespace {

SketchSet build_plain(const detail::LineSource& a, const detail::LineSource& b,
                      SketchParams params, BuildStats* stats) {
  const SketchParams effective = validate_params(params, a.dim(), b.dim());
  auto families = detail::make_families(effective);
  auto built = detail::build_families(a, b, families, nullptr, nullptr, effective.threads, stats);
  return SketchSet(a.dim(), a.lines(), b.dim(), effective, std::move(families),
                   std::move(built.unmasked));
}

}  // namespace

SketchSet compressed_product(const DenseMatrix& a, const DenseMatrix& b, SketchParams params,
                             BuildStats* stats) {
  return build_plain(detail::LineSource::columns(a), detail::LineSource::rows(b), params, stats);
}

SketchSet compressed_product(const SparseMatrix& a, const SparseMatrix& b, SketchParams params,
                             BuildStats* stats) {
  return build_plain(detail::LineSource::columns(a), detail::LineSource::rows(b), params, stats);
}

namespace {

void require_compatible(const SketchSet& x, const SketchSet& y) {
  const SketchParams& p = x.params();
  const SketchParams& q = y.params();
  if (x.n1() != y.n1() || x.n2() != y.n2() || x.n3() != y.n3())
    throw dim_error("sketch_add: dimension mismatch");
  if (p.buckets != q.buckets || p.reps != q.reps || p.seed != q.seed ||
      p.sign_independence != q.sign_independence)
    throw dim_error("sketch_add: parameter or seed mismatch");
}

}  // namespace

SketchSet sketch_add(const SketchSet& x, const SketchSet& y) {
  require_compatible(x, y);
  std::vector<std::vector<double>> coeff(x.reps());
  for (std::uint32_t t = 0; t < x.reps(); ++t) {
    auto cx = x.coefficients(t);
    auto cy = y.coefficients(t);
    coeff[t].resize(cx.size());
    for (std::size_t z = 0; z < cx.size(); ++z) coeff[t][z] = cx[z] + cy[z];
  }
  return SketchSet(x.n1(), x.n2(), x.n3(), x.params(), x.families(), std::move(coeff));
}

SketchSet sketch_scale(const SketchSet& x, double alpha) {
  if (!std::isfinite(alpha)) throw dim_error("sketch_scale: non-finite scale");
  std::vector<std::vector<double>> coeff(x.reps());
  for (std::uint32_t t = 0; t < x.reps(); ++t) {
    auto cx = x.coefficients(t);
    coeff[t].assign(cx.begin(), cx.end());
    for (double& v : coeff[t]) v *= alpha;
  }
  return SketchSet(x.n1(), x.n2(), x.n3(), x.params(), x.families(), std::move(coeff));
}

double ams_outer_sketch(std::span<const double> u, std::span<const double> v,
                        const SignPair& signs) {
  double su = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) su += signs.sign1(i) * u[i];
  for (std::size_t j = 0; j < v.size(); ++j) sv += signs.sign2(j) * v[j];
  return su * sv;
}

}  // namespace cmm
