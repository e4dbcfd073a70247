#pragma once

#include <cstdint>
#include <vector>

#include "dpse/nmf.hpp"
#include "dpse/score.hpp"
#include "dpse/score_net.hpp"

namespace dpse {

/// Per-frequency clean variance of the toy prior: a decaying low-pass
/// profile 0.3 exp(-f / 20) + 0.001, loosely shaped like speech energy in
/// the compressed STFT domain.
std::vector<double> toy_prior_profile(std::size_t f_bins);

/// Zero-mean independent Gaussian prior whose variance depends only on the
/// frequency bin.
AnalyticGaussianPrior make_profile_prior(const std::vector<double>& profile,
                                         std::size_t t_frames, const SdeSchedule& sched);

/// Draws zero-mean complex Gaussian patches with a per-frequency variance.
class GaussianPatchSource final : public PatchSource {
 public:
  explicit GaussianPatchSource(std::vector<double> profile);
  ComplexSpectrogram draw(Rng& rng, std::size_t patch_frames) override;
  const std::vector<double>& profile() const { return profile_; }

 private:
  std::vector<double> profile_;
};

/// Rank-r noise variance W H: column k of W is a Gaussian bump centred at
/// bin (k + 1) F / (r + 1) with width F / 10 plus a 0.01 floor, and H has
/// independent unit-mean exponential activations.
NmfParams synthetic_noise_model(std::size_t f_bins, std::size_t t_frames, std::size_t rank,
                                std::uint64_t seed);

/// Draws n_ft ~ N_C(0, V_ft) with V = W H.
ComplexSpectrogram sample_noise(const NmfParams& model, Rng& rng);

}  // namespace dpse
