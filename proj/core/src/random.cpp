#include "dpse/random.hpp"

#include <cmath>

namespace dpse {

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

Complex Rng::complex_normal() {
  static const double kScale = 1.0 / std::sqrt(2.0);
  const double re = normal();
  const double im = normal();
  return {kScale * re, kScale * im};
}

void Rng::fill_complex_normal(std::span<Complex> out) {
  for (auto& c : out) c = complex_normal();
}

ComplexSpectrogram Rng::complex_normal(std::size_t f_bins, std::size_t t_frames) {
  ComplexSpectrogram out(f_bins, t_frames);
  fill_complex_normal(out.values());
  return out;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0xD1B54A32D192ED03ULL));
}

}  // namespace dpse
