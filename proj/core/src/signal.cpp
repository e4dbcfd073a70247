#include "dpse/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dpse {

void Waveform::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
  for (double s : samples) {
    if (!std::isfinite(s)) throw std::invalid_argument("waveform contains non-finite samples");
  }
}

void StftConfig::validate() const {
  if (window_len < 2) throw std::invalid_argument("window_len must be >= 2");
  if (hop == 0 || hop > window_len) {
    throw std::invalid_argument("hop must satisfy 0 < hop <= window_len");
  }
  if (!(compress_alpha > 0.0 && compress_alpha <= 1.0)) {
    throw std::invalid_argument("compress_alpha must lie in (0, 1]");
  }
  if (!(compress_beta > 0.0)) throw std::invalid_argument("compress_beta must be positive");
}

std::size_t StftConfig::frames_for(std::size_t n_samples) const {
  const std::size_t padded = n_samples + 2 * (window_len / 2);
  if (padded <= window_len) return 1;
  return 1 + (padded - window_len + hop - 1) / hop;
}

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

Complex compress(Complex c, double alpha, double beta) {
  const double mag = std::abs(c);
  if (mag == 0.0) return {0.0, 0.0};
  return std::polar(beta * std::pow(mag, alpha), std::arg(c));
}

Complex decompress(Complex c, double alpha, double beta) {
  const double mag = std::abs(c);
  if (mag == 0.0) return {0.0, 0.0};
  return std::polar(std::pow(mag / beta, 1.0 / alpha), std::arg(c));
}

namespace {

// FFTW planning is not thread-safe; plans are created once per length under
// a lock and executed through the thread-safe new-array interface.
struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

const FftPlans& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, FftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  const int len = static_cast<int>(n);
  FftPlans p;
  p.forward = fftw_plan_dft_r2c_1d(len, real, spec, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inverse = fftw_plan_dft_c2r_1d(len, spec, real, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(real);
  fftw_free(spec);
  return cache.emplace(n, p).first->second;
}

}  // namespace

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  if (w.samples.empty()) throw std::invalid_argument("stft: empty waveform");
  w.validate();

  const std::size_t n_fft = cfg.window_len;
  const std::size_t pad = n_fft / 2;
  const std::size_t f_bins = cfg.f_bins();
  const std::size_t frames = cfg.frames_for(w.size());
  const auto window = periodic_hann(n_fft);
  const auto& plans = plans_for(n_fft);

  std::vector<double> frame(n_fft);
  std::vector<fftw_complex> bins(f_bins);
  ComplexSpectrogram out(f_bins, frames);
  const auto n = static_cast<std::ptrdiff_t>(w.size());
  for (std::size_t t = 0; t < frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * cfg.hop) - static_cast<std::ptrdiff_t>(pad);
    for (std::size_t i = 0; i < n_fft; ++i) {
      const auto idx = start + static_cast<std::ptrdiff_t>(i);
      frame[i] = (idx >= 0 && idx < n) ? w.samples[static_cast<std::size_t>(idx)] * window[i] : 0.0;
    }
    fftw_execute_dft_r2c(plans.forward, frame.data(), bins.data());
    for (std::size_t f = 0; f < f_bins; ++f) {
      out(f, t) = compress({bins[f][0], bins[f][1]}, cfg.compress_alpha, cfg.compress_beta);
    }
  }
  return out;
}

Waveform istft(const ComplexSpectrogram& spec, const StftConfig& cfg, std::size_t out_len,
               int sample_rate) {
  cfg.validate();
  if (spec.f_bins() != cfg.f_bins()) {
    throw std::invalid_argument("istft: spectrogram has " + std::to_string(spec.f_bins()) +
                                " bins, config expects " + std::to_string(cfg.f_bins()));
  }
  if (cfg.frames_for(out_len) != spec.t_frames()) {
    throw std::invalid_argument("istft: out_len " + std::to_string(out_len) + " implies " +
                                std::to_string(cfg.frames_for(out_len)) + " frames, got " +
                                std::to_string(spec.t_frames()));
  }

  const std::size_t n_fft = cfg.window_len;
  const std::size_t pad = n_fft / 2;
  const std::size_t frames = spec.t_frames();
  const auto window = periodic_hann(n_fft);
  const auto& plans = plans_for(n_fft);

  const std::size_t total = (frames - 1) * cfg.hop + n_fft;
  std::vector<double> acc(total, 0.0);
  std::vector<double> norm(total, 0.0);
  std::vector<fftw_complex> bins(cfg.f_bins());
  std::vector<double> frame(n_fft);
  const double inv_n = 1.0 / static_cast<double>(n_fft);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < cfg.f_bins(); ++f) {
      const Complex c = decompress(spec(f, t), cfg.compress_alpha, cfg.compress_beta);
      bins[f][0] = c.real();
      bins[f][1] = c.imag();
    }
    fftw_execute_dft_c2r(plans.inverse, bins.data(), frame.data());
    const std::size_t start = t * cfg.hop;
    for (std::size_t i = 0; i < n_fft; ++i) {
      acc[start + i] += frame[i] * inv_n * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }

  Waveform out;
  out.sample_rate = sample_rate;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t j = i + pad;
    out.samples[i] = j < total ? acc[j] / std::max(norm[j], 1e-12) : 0.0;
  }
  return out;
}

double signal_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double p = 0.0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

Mixture mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db,
                   std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("mix_at_snr: SNR must be finite");
  if (clean.samples.empty() || noise.samples.empty()) {
    throw std::invalid_argument("mix_at_snr: empty input");
  }
  clean.validate();
  noise.validate();

  const std::size_t n = clean.size();
  const std::size_t m = noise.size();
  std::mt19937_64 engine(seed);
  std::vector<double> fitted(n);
  if (m >= n) {
    std::uniform_int_distribution<std::size_t> offset(0, m - n);
    const std::size_t start = offset(engine);
    std::copy_n(noise.samples.begin() + static_cast<std::ptrdiff_t>(start), n, fitted.begin());
  } else {
    std::uniform_int_distribution<std::size_t> offset(0, m - 1);
    const std::size_t start = offset(engine);
    for (std::size_t i = 0; i < n; ++i) fitted[i] = noise.samples[(start + i) % m];
  }

  const double ps = signal_power(clean.samples);
  const double pn = signal_power(fitted);
  if (ps == 0.0) throw std::invalid_argument("mix_at_snr: clean signal has zero power");
  if (pn == 0.0) throw std::invalid_argument("mix_at_snr: noise has zero power");

  Mixture out;
  out.noise_scale = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  out.mixture.sample_rate = clean.sample_rate;
  out.mixture.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.mixture.samples[i] = clean.samples[i] + out.noise_scale * fitted[i];
  }
  return out;
}

}  // namespace dpse
