#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "dpse/spectrogram.hpp"

namespace dpse {

/// Seeded random stream. Each concurrent consumer owns its own instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  /// Circularly-symmetric complex normal: Re and Im independent, each with
  /// variance 1/2, so E|z|^2 = 1.
  Complex complex_normal();
  void fill_complex_normal(std::span<Complex> out);
  ComplexSpectrogram complex_normal(std::size_t f_bins, std::size_t t_frames);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Counter-based seed derivation: the stream for (master, index) does not
/// depend on the order in which streams are created.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

}  // namespace dpse
