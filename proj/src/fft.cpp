#include "cmm/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace cmm {

Fft::Fft(std::size_t n) : n_(n) {
  if (n < 2 || !std::has_single_bit(n)) throw dim_error("fft: length must be a power of two >= 2");
  log2n_ = static_cast<unsigned>(std::countr_zero(n));
  rev_.resize(n);
  for (std::size_t i = 1; i < n; ++i)
    rev_[i] = static_cast<std::uint32_t>((rev_[i >> 1] >> 1) | ((i & 1) << (log2n_ - 1)));
  twiddle_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void Fft::transform(std::complex<double>* data, bool invert) const {
  for (std::size_t i = 0; i < n_; ++i)
    if (i < rev_[i]) std::swap(data[i], data[rev_[i]]);

  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddle_[k * step];
        if (invert) w = std::conj(w);
        const std::complex<double> u = data[start + k];
        const std::complex<double> t = data[start + k + half] * w;
        data[start + k] = u + t;
        data[start + k + half] = u - t;
      }
    }
  }

  if (invert) {
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) data[i] *= scale;
  }
}

ComplexVector fft_forward(const ComplexVector& v) {
  ComplexVector out = v;
  Fft(v.size()).forward(out.data());
  return out;
}

ComplexVector fft_inverse(const ComplexVector& v) {
  ComplexVector out = v;
  Fft(v.size()).inverse(out.data());
  return out;
}

std::vector<double> cyclic_convolve(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) throw dim_error("cyclic_convolve: length mismatch");
  const std::size_t b = u.size();
  Fft fft(b);
  ComplexVector cu(b), cv(b);
  for (std::size_t i = 0; i < b; ++i) {
    cu[i] = u[i];
    cv[i] = v[i];
  }
  fft.forward(cu.data());
  fft.forward(cv.data());
  for (std::size_t i = 0; i < b; ++i) cu[i] *= cv[i];
  fft.inverse(cu.data());
  std::vector<double> out(b);
  for (std::size_t i = 0; i < b; ++i) out[i] = cu[i].real();
  return out;
}

}  // namespace cmm
