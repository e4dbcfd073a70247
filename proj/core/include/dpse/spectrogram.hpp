#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dpse {

using Complex = std::complex<double>;

/// F x T grid of complex time-frequency coefficients, stored F-major
/// (index f * T + t).
class ComplexSpectrogram {
 public:
  ComplexSpectrogram() = default;
  ComplexSpectrogram(std::size_t f_bins, std::size_t t_frames);
  ComplexSpectrogram(std::size_t f_bins, std::size_t t_frames,
                     std::vector<Complex> values);

  std::size_t f_bins() const { return f_bins_; }
  std::size_t t_frames() const { return t_frames_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  Complex& operator()(std::size_t f, std::size_t t) {
    return values_[f * t_frames_ + t];
  }
  const Complex& operator()(std::size_t f, std::size_t t) const {
    return values_[f * t_frames_ + t];
  }
  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }

  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }

  bool same_shape(const ComplexSpectrogram& other) const {
    return f_bins_ == other.f_bins_ && t_frames_ == other.t_frames_;
  }
  bool all_finite() const;
  /// Sum of squared magnitudes.
  double energy() const;

  ComplexSpectrogram& operator+=(const ComplexSpectrogram& rhs);
  ComplexSpectrogram& operator-=(const ComplexSpectrogram& rhs);
  ComplexSpectrogram& operator*=(double a);

  friend bool operator==(const ComplexSpectrogram&,
                         const ComplexSpectrogram&) = default;

 private:
  std::size_t f_bins_ = 0;
  std::size_t t_frames_ = 0;
  std::vector<Complex> values_;
};

ComplexSpectrogram operator+(ComplexSpectrogram lhs,
                             const ComplexSpectrogram& rhs);
ComplexSpectrogram operator-(ComplexSpectrogram lhs,
                             const ComplexSpectrogram& rhs);
ComplexSpectrogram operator*(double a, ComplexSpectrogram rhs);

/// Throws std::invalid_argument naming `what` if shapes differ.
void require_same_shape(const ComplexSpectrogram& a,
                        const ComplexSpectrogram& b, const char* what);

/// Real inner product sum(Re(conj(a) * b)), i.e. the dot product of the
/// stacked real/imag vectors.
double real_inner(const ComplexSpectrogram& a, const ComplexSpectrogram& b);

// Binary grid dump: 8-byte header (F, T as little-endian uint32), then
// F*T interleaved (re, im) little-endian float32 pairs in F-major order.
void write_grid(const std::string& path, const ComplexSpectrogram& spec);
ComplexSpectrogram read_grid(const std::string& path);

}  // namespace dpse
