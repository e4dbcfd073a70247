#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpse/nmf.hpp"
#include "dpse/sampler.hpp"
#include "dpse/signal.hpp"

namespace dpse {

struct EnhancementConfig {
  std::size_t em_iters = 5;
  /// Reverse steps N, stride l and weight lambda live here.
  SamplerConfig sampler;
  std::size_t nmf_rank = 4;
  std::size_t batch = 4;
  std::size_t nmf_inner_updates = 20;
  std::uint64_t seed = 0;
  /// Threads used for the b chains of one E-step. Results do not depend on it.
  std::size_t jobs = 1;
  /// When false the noise model stays at its initial value (M-step skipped).
  bool update_noise = true;

  void validate() const;
};

struct EmIterationTrace {
  double objective_before = 0.0;  ///< M-step objective at the warm-started factors
  double objective_after = 0.0;
  double mean_residual_power = 0.0;  ///< mean |x - s_hat|^2
  double mean_noise_variance = 0.0;  ///< mean of W H after the M-step
};

struct EnhancementResult {
  ComplexSpectrogram s_hat;
  NmfParams nmf;
  std::vector<EmIterationTrace> trace;
};

/// Seed of chain j in EM iteration k.
std::uint64_t chain_seed(std::uint64_t master, std::size_t iteration, std::size_t chain);

/// Alternates b-chain posterior sampling (averaged elementwise) and IS-NMF
/// M-steps for em_iters iterations. The noise model is initialised from the
/// mean mixture power unless `initial_noise` is supplied.
EnhancementResult enhance_spectrogram(const ComplexSpectrogram& x, const ScoreModel& model,
                                      const SdeSchedule& sched, const EnhancementConfig& cfg,
                                      const std::optional<NmfParams>& initial_noise = std::nullopt);

/// stft -> enhance_spectrogram -> istft at the input length. Requires 16 kHz.
Waveform enhance_waveform(const Waveform& noisy, const ScoreModel& model,
                          const SdeSchedule& sched, const StftConfig& stft_cfg,
                          const EnhancementConfig& cfg, EnhancementResult* details = nullptr);

}  // namespace dpse
