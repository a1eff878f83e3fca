#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace collapse {

/// In-place radix-2 FFT with precomputed twiddles. Unnormalized forward
/// transform (e^{-2 pi i jk/n}); inverse divides by n. Results depend only on
/// the input, never on threading.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }
  void forward(std::span<std::complex<double>> data) const;
  void inverse(std::span<std::complex<double>> data) const;

 private:
  void transform(std::span<std::complex<double>> data, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

}  // namespace collapse
