#pragma once

#include <string>

#include "dpse/score_net.hpp"

namespace dpse {

/// Checkpoint layout (all little-endian):
///   "DPSESCN\0", u32 version,
///   schedule: f64 gamma, f64 sigma_min, f64 sigma_max, f64 t_min, u32 leading,
///   architecture: u32 hidden, u32 hidden_layers, u32 freq_features,
///                 f64 data_variance, f64 ema_decay,
///   u64 step, u64 parameter count,
///   float32 blobs: parameters, EMA parameters, Adam m, Adam v.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ToyScoreNet& model, const std::string& path);
/// Throws IoError on a missing file, wrong magic, unsupported version,
/// truncation or trailing bytes.
ToyScoreNet load_checkpoint(const std::string& path);

}  // namespace dpse
