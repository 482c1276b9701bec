#include "cmm/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace cmm {

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw io_error("cannot write " + path);
  }

  void u8(std::uint8_t v) { raw(&v, 1); }
  void u16(std::uint16_t v) { uint(v, 2); }
  void u32(std::uint32_t v) { uint(v, 4); }
  void u64(std::uint64_t v) { uint(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const char* data, std::size_t len) { raw(data, len); }

  void finish() {
    out_.flush();
    if (!out_) throw io_error("write failed: " + path_);
  }

 private:
  void uint(std::uint64_t v, unsigned n) {
    char buf[8];
    for (unsigned i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    raw(buf, n);
  }
  void raw(const void* data, std::size_t len) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  }

  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw io_error("cannot open " + path);
  }

  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  void bytes(char* data, std::size_t len) { raw(data, len); }

  bool at_end() {
    in_.peek();
    return in_.eof();
  }

 private:
  std::uint64_t uint(unsigned n) {
    char buf[8];
    raw(buf, n);
    std::uint64_t v = 0;
    for (unsigned i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
  }
  void raw(void* data, std::size_t len) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (!in_) throw parse_error(path_ + ": truncated sketch file");
  }

  std::ifstream in_;
  std::string path_;
};

void write_header(Writer& w, const SketchSet& base, bool recoverable) {
  w.bytes(kSketchMagic, 4);
  w.u16(kSketchFormatVersion);
  w.u8(recoverable ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(base.params().sign_independence));
  w.u64(base.n1());
  w.u64(base.n2());
  w.u64(base.n3());
  w.u32(base.buckets());
  w.u32(base.reps());
  w.u64(base.params().seed);
}

void write_vector(Writer& w, std::span<const double> v) {
  for (double x : v) w.f64(x);
}

}  // namespace

void store_sketch(const std::string& path, const SketchSet& sk) {
  Writer w(path);
  write_header(w, sk, false);
  for (std::uint32_t t = 0; t < sk.reps(); ++t) write_vector(w, sk.coefficients(t));
  w.finish();
}

void store_sketch(const std::string& path, const RecoverableSketch& sk) {
  if (sk.row_code().delta_num() != sk.col_code().delta_num() ||
      sk.row_code().delta_den() != sk.col_code().delta_den())
    throw dim_error("sketch file format stores one decoding radius for both codes");
  Writer w(path);
  const SketchSet& base = sk.base();
  write_header(w, base, true);
  w.u32(static_cast<std::uint32_t>(sk.row_code().length()));
  w.u32(static_cast<std::uint32_t>(sk.col_code().length()));
  w.u32(sk.row_code().delta_num());
  w.u32(sk.row_code().delta_den());
  w.u64(sk.row_code().seed());
  w.u64(sk.col_code().seed());
  for (std::uint32_t t = 0; t < base.reps(); ++t) {
    write_vector(w, base.coefficients(t));
    for (std::size_t r = 0; r < sk.masked_families(); ++r) write_vector(w, sk.masked(t, r));
  }
  w.finish();
}

void store_sketch(const std::string& path, const AnySketch& sk) {
  if (std::holds_alternative<SketchSet>(sk))
    store_sketch(path, std::get<SketchSet>(sk));
  else
    store_sketch(path, std::get<RecoverableSketch>(sk));
}

AnySketch load_sketch(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kSketchMagic, 4) != 0)
    throw parse_error(path + ": not a sketch file (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kSketchFormatVersion)
    throw parse_error(path + ": unsupported format version " + std::to_string(version));
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw parse_error(path + ": unknown mode");
  const std::uint8_t sign_ind = r.u8();
  if (sign_ind > 1) throw parse_error(path + ": unknown sign independence");

  const std::uint64_t n1 = r.u64();
  const std::uint64_t n2 = r.u64();
  const std::uint64_t n3 = r.u64();
  SketchParams params;
  params.buckets = r.u32();
  params.reps = r.u32();
  params.seed = r.u64();
  params.sign_independence = static_cast<SignIndependence>(sign_ind);

  auto read_vector = [&r, &params]() {
    std::vector<double> v(params.buckets);
    for (double& x : v) x = r.f64();
    return v;
  };

  if (mode == 0) {
    std::vector<std::vector<double>> coeff(params.reps);
    for (auto& c : coeff) c = read_vector();
    if (!r.at_end()) throw parse_error(path + ": trailing bytes");
    return SketchSet::from_parts(n1, n2, n3, params, std::move(coeff));
  }

  const std::uint32_t ell_row = r.u32();
  const std::uint32_t ell_col = r.u32();
  const std::uint32_t delta_num = r.u32();
  const std::uint32_t delta_den = r.u32();
  const std::uint64_t row_seed = r.u64();
  const std::uint64_t col_seed = r.u64();

  std::vector<std::vector<double>> coeff(params.reps);
  std::vector<std::vector<std::vector<double>>> masked(params.reps);
  for (std::uint32_t t = 0; t < params.reps; ++t) {
    coeff[t] = read_vector();
    masked[t].resize(ell_row + std::size_t(ell_col));
    for (auto& m : masked[t]) m = read_vector();
  }
  if (!r.at_end()) throw parse_error(path + ": trailing bytes");

  Code row_code = Code::build(n1, delta_num, delta_den, row_seed, ell_row);
  Code col_code = Code::build(n3, delta_num, delta_den, col_seed, ell_col);
  SketchSet base = SketchSet::from_parts(n1, n2, n3, params, std::move(coeff));
  return RecoverableSketch(std::move(base), std::move(row_code), std::move(col_code),
                           std::move(masked));
}

}  // namespace cmm
