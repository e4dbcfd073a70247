#include "dpse/spectrogram.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "binary_io.hpp"
#include "dpse/error.hpp"

namespace dpse {

ComplexSpectrogram::ComplexSpectrogram(std::size_t f_bins, std::size_t t_frames)
    : ComplexSpectrogram(f_bins, t_frames,
                         std::vector<Complex>(f_bins * t_frames)) {}

ComplexSpectrogram::ComplexSpectrogram(std::size_t f_bins, std::size_t t_frames,
                                       std::vector<Complex> values)
    : f_bins_(f_bins), t_frames_(t_frames), values_(std::move(values)) {
  if (f_bins == 0 || t_frames == 0) {
    throw std::invalid_argument("spectrogram needs F >= 1 and T >= 1");
  }
  if (values_.size() != f_bins * t_frames) {
    throw std::invalid_argument("spectrogram value count does not match F*T");
  }
}

bool ComplexSpectrogram::all_finite() const {
  for (const auto& c : values_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

double ComplexSpectrogram::energy() const {
  double e = 0.0;
  for (const auto& c : values_) e += std::norm(c);
  return e;
}

ComplexSpectrogram& ComplexSpectrogram::operator+=(const ComplexSpectrogram& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
  return *this;
}

ComplexSpectrogram& ComplexSpectrogram::operator-=(const ComplexSpectrogram& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
  return *this;
}

ComplexSpectrogram& ComplexSpectrogram::operator*=(double a) {
  for (auto& c : values_) c *= a;
  return *this;
}

ComplexSpectrogram operator+(ComplexSpectrogram lhs, const ComplexSpectrogram& rhs) {
  lhs += rhs;
  return lhs;
}

ComplexSpectrogram operator-(ComplexSpectrogram lhs, const ComplexSpectrogram& rhs) {
  lhs -= rhs;
  return lhs;
}

ComplexSpectrogram operator*(double a, ComplexSpectrogram rhs) {
  rhs *= a;
  return rhs;
}

void require_same_shape(const ComplexSpectrogram& a, const ComplexSpectrogram& b,
                        const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(
        std::string(what) + ": shape mismatch (" + std::to_string(a.f_bins()) +
        "x" + std::to_string(a.t_frames()) + " vs " + std::to_string(b.f_bins()) +
        "x" + std::to_string(b.t_frames()) + ")");
  }
}

double real_inner(const ComplexSpectrogram& a, const ComplexSpectrogram& b) {
  require_same_shape(a, b, "real_inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  }
  return acc;
}

void write_grid(const std::string& path, const ComplexSpectrogram& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  BinaryWriter w(out);
  w.u32(static_cast<std::uint32_t>(spec.f_bins()));
  w.u32(static_cast<std::uint32_t>(spec.t_frames()));
  for (const auto& c : spec.values()) {
    w.f32(static_cast<float>(c.real()));
    w.f32(static_cast<float>(c.imag()));
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

ComplexSpectrogram read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  BinaryReader r(in, path);
  const std::uint32_t f = r.u32();
  const std::uint32_t t = r.u32();
  if (f == 0 || t == 0) throw IoError("grid '" + path + "' has an empty dimension");
  std::vector<Complex> values(static_cast<std::size_t>(f) * t);
  for (auto& c : values) {
    const float re = r.f32();
    const float im = r.f32();
    c = {re, im};
  }
  return ComplexSpectrogram(f, t, std::move(values));
}

}  // namespace dpse
