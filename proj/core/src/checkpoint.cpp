#include "dpse/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "binary_io.hpp"
#include "dpse/error.hpp"

namespace dpse {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'P', 'S', 'E', 'S', 'C', 'N', '\0'};

void write_blob(BinaryWriter& w, std::span<const float> blob) {
  for (float v : blob) w.f32(v);
}

std::vector<float> read_blob(BinaryReader& r, std::size_t n) {
  std::vector<float> blob(n);
  for (auto& v : blob) v = r.f32();
  return blob;
}

}  // namespace

void save_checkpoint(const ToyScoreNet& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  BinaryWriter w(out);
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);

  const auto& s = model.schedule();
  w.f64(s.gamma);
  w.f64(s.sigma_min);
  w.f64(s.sigma_max);
  w.f64(s.t_min);
  w.u32(static_cast<std::uint32_t>(s.leading));

  const auto& c = model.config();
  w.u32(static_cast<std::uint32_t>(c.hidden));
  w.u32(static_cast<std::uint32_t>(c.hidden_layers));
  w.u32(static_cast<std::uint32_t>(c.freq_features));
  w.f64(c.data_variance);
  w.f64(c.ema_decay);

  w.u64(model.step());
  w.u64(model.parameter_count());
  write_blob(w, model.parameters());
  write_blob(w, model.ema_parameters());
  write_blob(w, model.adam_state().m);
  write_blob(w, model.adam_state().v);
  out.flush();
  if (!out) throw IoError("failed while writing '" + path + "'");
}

ToyScoreNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  BinaryReader r(in, path);

  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw IoError("'" + path + "' is not a dpse checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError("'" + path + "' has checkpoint version " + std::to_string(version) +
                  ", expected " + std::to_string(kCheckpointVersion));
  }

  SdeSchedule sched;
  sched.gamma = r.f64();
  sched.sigma_min = r.f64();
  sched.sigma_max = r.f64();
  sched.t_min = r.f64();
  const auto leading = r.u32();
  if (leading > 1) throw IoError("'" + path + "' has an unknown diffusion variant");
  sched.leading = static_cast<DiffusionLeading>(leading);

  ScoreNetConfig cfg;
  cfg.hidden = r.u32();
  cfg.hidden_layers = r.u32();
  cfg.freq_features = r.u32();
  cfg.data_variance = r.f64();
  cfg.ema_decay = r.f64();

  const auto step = r.u64();
  const auto count = r.u64();
  try {
    cfg.validate();
    sched.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError("'" + path + "' holds invalid settings: " + e.what());
  }
  if (count != cfg.parameter_count()) {
    throw IoError("'" + path + "' parameter count does not match its architecture");
  }
  auto params = read_blob(r, count);
  auto ema = read_blob(r, count);
  ToyScoreNet::AdamState adam;
  adam.m = read_blob(r, count);
  adam.v = read_blob(r, count);
  if (!r.at_end()) throw IoError("'" + path + "' has trailing bytes");
  return ToyScoreNet(cfg, sched, std::move(params), std::move(ema), std::move(adam), step);
}

}  // namespace dpse
