#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "binary_io.hpp"
#include "dpse/error.hpp"
#include "dpse/signal.hpp"

namespace dpse {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

bool tag_is(const char (&tag)[4], const char* expected) {
  return std::memcmp(tag, expected, 4) == 0;
}

}  // namespace

Waveform load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  BinaryReader r(in, path);

  char tag[4];
  r.bytes(tag, 4);
  if (!tag_is(tag, "RIFF")) throw IoError("'" + path + "' is not a RIFF file");
  r.u32();
  r.bytes(tag, 4);
  if (!tag_is(tag, "WAVE")) throw IoError("'" + path + "' is not a WAVE file");

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;

  while (true) {
    if (r.at_end()) throw IoError("'" + path + "' has no data chunk");
    r.bytes(tag, 4);
    const std::uint32_t size = r.u32();
    if (tag_is(tag, "fmt ")) {
      if (size < 16) throw IoError("'" + path + "' has a corrupt fmt chunk");
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      std::uint32_t consumed = 16;
      if (format == kFormatExtensible && size >= 40) {
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // first two bytes of the subformat GUID
        consumed += 10;
      }
      r.skip(size - consumed + (size & 1u));
      have_fmt = true;
    } else if (tag_is(tag, "data")) {
      if (!have_fmt) throw IoError("'" + path + "' has data before fmt");
      if (channels != 1) {
        throw IoError("'" + path + "' has " + std::to_string(channels) +
                      " channels; only mono is supported");
      }
      if (rate == 0) throw IoError("'" + path + "' declares a zero sample rate");
      Waveform w;
      w.sample_rate = static_cast<int>(rate);
      if (format == kFormatPcm && bits == 16) {
        w.samples.resize(size / 2);
        for (auto& s : w.samples) {
          s = static_cast<double>(static_cast<std::int16_t>(r.u16())) / 32768.0;
        }
      } else if (format == kFormatFloat && bits == 32) {
        w.samples.resize(size / 4);
        for (auto& s : w.samples) s = static_cast<double>(r.f32());
      } else {
        throw IoError("'" + path + "' uses unsupported encoding (format " +
                      std::to_string(format) + ", " + std::to_string(bits) +
                      " bits); expected PCM16 or float32");
      }
      for (double s : w.samples) {
        if (!std::isfinite(s)) throw IoError("'" + path + "' contains non-finite samples");
      }
      return w;
    } else {
      r.skip(size + (size & 1u));
    }
  }
}

void save_wav(const std::string& path, const Waveform& w, WavFormat format) {
  if (w.sample_rate <= 0) throw std::invalid_argument("save_wav: sample_rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  BinaryWriter bw(out);

  const bool pcm = format == WavFormat::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.size() * (bits / 8));

  bw.bytes("RIFF", 4);
  bw.u32(36 + data_bytes);
  bw.bytes("WAVE", 4);
  bw.bytes("fmt ", 4);
  bw.u32(16);
  bw.u16(pcm ? kFormatPcm : kFormatFloat);
  bw.u16(1);
  bw.u32(static_cast<std::uint32_t>(w.sample_rate));
  bw.u32(static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  bw.u16(bits / 8);
  bw.u16(bits);
  bw.bytes("data", 4);
  bw.u32(data_bytes);
  for (double s : w.samples) {
    const double clipped = std::isfinite(s) ? std::clamp(s, -1.0, 1.0) : 0.0;
    if (pcm) {
      const double q = std::clamp(std::round(clipped * 32768.0), -32768.0, 32767.0);
      bw.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      bw.f32(static_cast<float>(clipped));
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace dpse
