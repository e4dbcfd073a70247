#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "dpse/error.hpp"
#include "dpse/random.hpp"
#include "dpse/signal.hpp"

using namespace dpse;

namespace {

Waveform two_tone(std::size_t n) {
  Waveform w;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i);
    w.samples.push_back(std::sin(2 * std::numbers::pi * 0.05 * k) +
                        0.3 * std::cos(2 * std::numbers::pi * 0.173 * k + 0.4));
  }
  return w;
}

Waveform noise_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(0.3 * rng.normal());
  return w;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dpse_test_" + name)).string();
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

std::vector<unsigned char> pcm16_file(std::uint16_t channels, const std::vector<std::int16_t>& data) {
  std::vector<unsigned char> b = {'R', 'I', 'F', 'F'};
  put_u32(b, static_cast<std::uint32_t>(36 + 2 * data.size()));
  for (char c : std::string("WAVEfmt ")) b.push_back(static_cast<unsigned char>(c));
  put_u32(b, 16);
  put_u16(b, 1);
  put_u16(b, channels);
  put_u32(b, 16000);
  put_u32(b, 16000u * 2u * channels);
  put_u16(b, static_cast<std::uint16_t>(2 * channels));
  put_u16(b, 16);
  for (char c : std::string("data")) b.push_back(static_cast<unsigned char>(c));
  put_u32(b, static_cast<std::uint32_t>(2 * data.size()));
  for (auto v : data) put_u16(b, static_cast<std::uint16_t>(v));
  return b;
}

}  // namespace

TEST_CASE("stft matches a direct windowed DFT") {
  // Reference values from an independent numpy implementation (centered
  // frames, periodic Hann 510, hop 128, alpha 0.5, beta 0.15).
  const auto spec = stft(two_tone(2000), StftConfig{});
  REQUIRE(spec.f_bins() == 256);
  REQUIRE(spec.t_frames() == 17);
  struct Ref {
    std::size_t f, t;
    double re, im;
  };
  const Ref refs[] = {
      {10, 5, -7.913462921790602e-06, -0.015021039012859531},
      {26, 3, 1.4840991126842602, -0.4822102159118719},
      {88, 7, 0.8210634427137836, 0.3968876576586419},
      {0, 0, 0.2683610330207054, 0.0},
      {255, 16, 0.04397032281104885, 0.0},
  };
  for (const auto& r : refs) {
    CHECK(spec(r.f, r.t).real() == doctest::Approx(r.re).epsilon(1e-9));
    CHECK(spec(r.f, r.t).imag() == doctest::Approx(r.im).epsilon(1e-9));
  }
}

TEST_CASE("stft of silence is zero and has 256 bins") {
  Waveform w;
  w.samples.assign(16000, 0.0);
  const auto spec = stft(w, StftConfig{});
  CHECK(spec.f_bins() == 256);
  CHECK(spec.energy() == 0.0);
}

TEST_CASE("1 kHz tone concentrates around bin 32") {
  Waveform w;
  for (int i = 0; i < 16000; ++i) w.samples.push_back(std::sin(2 * std::numbers::pi * 1000.0 * i / 16000.0));
  StftConfig cfg;
  cfg.compress_alpha = 1.0;
  cfg.compress_beta = 1.0;
  const auto spec = stft(w, cfg);
  std::vector<double> e(spec.f_bins(), 0.0);
  for (std::size_t f = 0; f < spec.f_bins(); ++f) {
    for (std::size_t t = 0; t < spec.t_frames(); ++t) e[f] += std::norm(spec(f, t));
  }
  const auto peak = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
  CHECK(peak == 32);
  double total = 0.0;
  for (double v : e) total += v;
  CHECK((e[31] + e[32] + e[33]) / total > 0.99);
}

TEST_CASE("istft inverts stft") {
  const StftConfig cfg;
  const auto w = noise_signal(9000, 3);
  const auto back = istft(stft(w, cfg), cfg, w.size());
  REQUIRE(back.size() == w.size());
  double worst = 0.0;
  for (std::size_t i = cfg.window_len; i + cfg.window_len < w.size(); ++i) {
    worst = std::max(worst, std::abs(back.samples[i] - w.samples[i]));
  }
  CHECK(worst < 1e-6);

  Waveform half = w;
  for (auto& v : half.samples) v *= 0.5;
  const auto back_half = istft(stft(half, cfg), cfg, w.size());
  for (std::size_t i = cfg.window_len; i + cfg.window_len < w.size(); ++i) {
    CHECK(std::abs(back_half.samples[i] - 0.5 * w.samples[i]) < 1e-6);
  }
}

TEST_CASE("istft of zeros is zero; shape mismatches throw") {
  const StftConfig cfg;
  const auto zero = istft(ComplexSpectrogram(256, cfg.frames_for(4000)), cfg, 4000);
  for (double v : zero.samples) CHECK(v == 0.0);
  CHECK_THROWS_AS(istft(ComplexSpectrogram(255, cfg.frames_for(4000)), cfg, 4000),
                  std::invalid_argument);
  CHECK_THROWS_AS(istft(ComplexSpectrogram(256, 3), cfg, 4000), std::invalid_argument);
}

TEST_CASE("compression is a bijection") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Complex c(3 * rng.normal(), 3 * rng.normal());
    const Complex back = decompress(compress(c, 0.5, 0.15), 0.5, 0.15);
    CHECK(std::abs(back - c) <= 1e-9 * std::abs(c));
  }
  CHECK(compress(Complex(0, 0), 0.5, 0.15) == Complex(0, 0));
  const Complex c = compress(Complex(4, 0), 0.5, 0.15);
  CHECK(c.real() == doctest::Approx(0.3));
}

TEST_CASE("stft rejects bad input and configs") {
  Waveform empty;
  CHECK_THROWS(stft(empty, StftConfig{}));
  Waveform bad;
  bad.samples = {0.0, NAN, 0.0};
  CHECK_THROWS(stft(bad, StftConfig{}));
  StftConfig cfg;
  cfg.hop = 0;
  CHECK_THROWS(cfg.validate());
  cfg = StftConfig{};
  cfg.hop = 600;
  CHECK_THROWS(cfg.validate());
  cfg = StftConfig{};
  cfg.compress_alpha = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = StftConfig{};
  cfg.compress_beta = 0.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("window-sum Parseval bound") {
  StftConfig cfg;
  cfg.compress_alpha = 1.0;
  cfg.compress_beta = 1.0;
  const auto w = noise_signal(8000, 5);
  const auto spec = stft(w, cfg);
  // Every sample is covered by overlapping frames whose squared window sum
  // is 1.5 (periodic Hann at 75% overlap: 3/8 * 510/128 ~ 1.494). Full-band
  // rfft energy counts interior bins twice.
  double spec_energy = 0.0;
  for (std::size_t f = 0; f < spec.f_bins(); ++f) {
    const double weight = (f == 0 || f == spec.f_bins() - 1) ? 1.0 : 2.0;
    for (std::size_t t = 0; t < spec.t_frames(); ++t) spec_energy += weight * std::norm(spec(f, t));
  }
  spec_energy /= static_cast<double>(cfg.window_len);
  double wave_energy = 0.0;
  for (double v : w.samples) wave_energy += v * v;
  const double ratio = spec_energy / wave_energy;
  CHECK(ratio > 1.3);
  CHECK(ratio < 1.7);
}

TEST_CASE("mix_at_snr hits the requested SNR") {
  const auto clean = noise_signal(4000, 1);
  auto noise = clean;
  for (auto& v : noise.samples) v = -v;
  CHECK(mix_at_snr(clean, noise, 0.0, 1).noise_scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mix_at_snr(clean, noise, 20.0, 1).noise_scale == doctest::Approx(0.1).epsilon(1e-12));

  for (std::size_t len : {1500u, 4000u, 11000u}) {
    const auto other = noise_signal(len, 9);
    for (double snr : {-5.0, 0.0, 5.0, 13.7}) {
      const auto m = mix_at_snr(clean, other, snr, 42);
      REQUIRE(m.mixture.size() == clean.size());
      std::vector<double> n(clean.size());
      for (std::size_t i = 0; i < n.size(); ++i) n[i] = m.mixture.samples[i] - clean.samples[i];
      const double measured = 10.0 * std::log10(signal_power(clean.samples) / signal_power(n));
      CHECK(std::abs(measured - snr) < 1e-9);
    }
  }
  CHECK(mix_at_snr(clean, noise_signal(11000, 9), 0.0, 7).mixture.samples ==
        mix_at_snr(clean, noise_signal(11000, 9), 0.0, 7).mixture.samples);
}

TEST_CASE("mix_at_snr rejects silent inputs and infinite SNR") {
  const auto clean = noise_signal(100, 1);
  Waveform silent;
  silent.samples.assign(100, 0.0);
  CHECK_THROWS(mix_at_snr(silent, clean, 0.0, 1));
  CHECK_THROWS(mix_at_snr(clean, silent, 0.0, 1));
  CHECK_THROWS(mix_at_snr(clean, clean, INFINITY, 1));
}

TEST_CASE("wav PCM16 scaling and float32 round trip") {
  const auto path = temp_path("pcm16.wav");
  write_bytes(path, pcm16_file(1, {16384, -32768, 0, 32767}));
  const auto w = load_wav(path);
  REQUIRE(w.size() == 4);
  CHECK(w.sample_rate == 16000);
  CHECK(w.samples[0] == 0.5);
  CHECK(w.samples[1] == -1.0);
  CHECK(w.samples[2] == 0.0);

  Waveform f;
  Rng rng(4);
  for (int i = 0; i < 300; ++i) f.samples.push_back(static_cast<float>(std::clamp(0.3 * rng.normal(), -1.0, 1.0)));
  const auto fpath = temp_path("f32.wav");
  save_wav(fpath, f, WavFormat::kFloat32);
  CHECK(load_wav(fpath).samples == f.samples);

  save_wav(fpath, w, WavFormat::kPcm16);
  const auto again = load_wav(fpath);
  CHECK(again.samples[0] == 0.5);
  std::filesystem::remove(path);
  std::filesystem::remove(fpath);
}

TEST_CASE("wav errors are descriptive") {
  const auto path = temp_path("stereo.wav");
  write_bytes(path, pcm16_file(2, {1, 2, 3, 4}));
  try {
    load_wav(path);
    FAIL("stereo file accepted");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("2 channels") != std::string::npos);
  }
  write_bytes(path, {'R', 'I', 'F', 'F', 0, 0});
  CHECK_THROWS_AS(load_wav(path), IoError);
  CHECK_THROWS_AS(load_wav(temp_path("does_not_exist.wav")), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("save_wav clips") {
  Waveform w;
  w.samples = {2.0, -3.0, 0.25};
  const auto path = temp_path("clip.wav");
  save_wav(path, w);
  const auto back = load_wav(path);
  CHECK(back.samples == std::vector<double>{1.0, -1.0, 0.25});
  std::filesystem::remove(path);
}
