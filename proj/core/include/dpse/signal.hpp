#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dpse/spectrogram.hpp"

namespace dpse {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  /// Throws std::invalid_argument on non-positive rate or non-finite samples.
  void validate() const;
};

enum class WindowKind { kHann };

struct StftConfig {
  std::size_t window_len = 510;
  std::size_t hop = 128;
  WindowKind window = WindowKind::kHann;
  double compress_alpha = 0.5;
  double compress_beta = 0.15;

  void validate() const;
  /// FFT length equals the window length, so F = window_len / 2 + 1.
  std::size_t f_bins() const { return window_len / 2 + 1; }
  /// Frame count produced by stft() for a signal of n samples.
  std::size_t frames_for(std::size_t n_samples) const;
};

/// Periodic Hann window of length n.
std::vector<double> periodic_hann(std::size_t n);

/// c -> beta * |c|^alpha * exp(i arg c); the phase of 0 is taken as 0.
Complex compress(Complex c, double alpha, double beta);
Complex decompress(Complex c, double alpha, double beta);

/// Centered STFT (signal zero-padded by window_len/2 on both sides) followed
/// by amplitude compression.
ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg);

/// Decompression, inverse FFT and squared-window overlap-add. `out_len` must
/// map to the spectrogram's frame count under `cfg`.
Waveform istft(const ComplexSpectrogram& spec, const StftConfig& cfg,
               std::size_t out_len, int sample_rate = 16000);

struct Mixture {
  Waveform mixture;
  /// Gain c applied to the noise: mixture = clean + c * noise.
  double noise_scale = 0.0;
};

/// Adds the noise to the clean signal at the requested SNR. Noise longer
/// than the clean signal is cropped at a seeded random offset; shorter noise
/// is tiled first.
Mixture mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db,
                   std::uint64_t seed);

double signal_power(const std::vector<double>& x);

enum class WavFormat { kPcm16, kFloat32 };

/// Reads a mono RIFF/WAVE file (PCM16 or IEEE float32). PCM16 is scaled by
/// 1/32768.
Waveform load_wav(const std::string& path);
/// Writes a mono WAV file; samples are clipped to [-1, 1].
void save_wav(const std::string& path, const Waveform& w,
              WavFormat format = WavFormat::kFloat32);

}  // namespace dpse
