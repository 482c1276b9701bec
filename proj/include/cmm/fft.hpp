#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cmm/errors.hpp"

namespace cmm {

using ComplexVector = std::vector<std::complex<double>>;

/// Radix-2 iterative FFT plan for one power-of-two size. Precomputes the
/// bit-reversal permutation and twiddle factors; transforms run in place.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }

  void forward(std::complex<double>* data) const { transform(data, false); }
  void inverse(std::complex<double>* data) const { transform(data, true); }

 private:
  void transform(std::complex<double>* data, bool invert) const;

  std::size_t n_ = 0;
  unsigned log2n_ = 0;
  std::vector<std::uint32_t> rev_;
  std::vector<std::complex<double>> twiddle_;  // e^{-2*pi*i*k/n}, k < n/2
};

/// Out-of-place convenience wrappers.
ComplexVector fft_forward(const ComplexVector& v);
ComplexVector fft_inverse(const ComplexVector& v);

/// Cyclic convolution of two equal-length power-of-two real vectors:
/// result[k] = sum_{i+j == k mod b} u[i]*v[j]. Imaginary residues from the
/// complex transform are discarded.
std::vector<double> cyclic_convolve(const std::vector<double>& u, const std::vector<double>& v);

}  // namespace cmm
