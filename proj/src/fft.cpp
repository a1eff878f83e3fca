#include "collapse/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "collapse/errors.hpp"

namespace collapse {

Fft::Fft(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
  require(n >= 2 && (n & (n - 1)) == 0, ErrorCode::Domain, "FFT size must be a power of two");
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    bitrev_[i] = r;
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle_[k] = {std::cos(ang), std::sin(ang)};
  }
}

void Fft::forward(std::span<std::complex<double>> data) const { transform(data, false); }

void Fft::inverse(std::span<std::complex<double>> data) const {
  transform(data, true);
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

void Fft::transform(std::span<std::complex<double>> data, bool inverse) const {
  require(data.size() == n_, ErrorCode::Contract, "FFT buffer size mismatch");
  for (std::size_t i = 0; i < n_; ++i)
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);

  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        auto w = twiddle_[j * stride];
        if (inverse) w = std::conj(w);
        const auto& a = data[start + j];
        const auto b = data[start + j + half];
        // explicit real arithmetic; std::complex operator* adds NaN checks
        const std::complex<double> wb{w.real() * b.real() - w.imag() * b.imag(),
                                      w.real() * b.imag() + w.imag() * b.real()};
        data[start + j + half] = a - wb;
        data[start + j] = a + wb;
      }
    }
  }
}

}  // namespace collapse
