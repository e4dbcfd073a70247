#pragma once

#include <cstddef>
#include <vector>

#include "dpse/random.hpp"
#include "dpse/score.hpp"

namespace dpse {

/// How the guidance term lambda * g^2 * grad log p~(x | s) is applied.
///
/// kExplicit adds it as written. Because the pseudo-likelihood score is
/// linear in s with slope -1/(sigma^2 + delta^2 v), the explicit update
/// multiplies (s - delta x) by (1 - r), r = lambda g^2 / (sigma^2 + delta^2 v),
/// which overshoots when r > 1 and diverges when r > 2 — routinely the case
/// for small noise variances. kProximal applies the same term implicitly,
/// s <- (s + r delta x) / (1 + r), which agrees to first order in r and is
/// stable for every r >= 0.
enum class GuidanceUpdate { kProximal, kExplicit };

struct SamplerConfig {
  std::size_t n_steps = 30;
  std::size_t posterior_every = 2;
  double guidance_weight = 1.5;
  bool corrector_enabled = true;
  std::size_t corrector_steps = 1;
  GuidanceUpdate guidance_update = GuidanceUpdate::kProximal;
  /// Replace the final state by its Tweedie estimate
  /// (s + sigma(t_min)^2 S(s, t_min)) / delta(t_min), removing the residual
  /// t_min perturbation noise.
  bool final_denoise = true;

  void validate() const;
};

struct GuidanceContext {
  ComplexSpectrogram x;
  std::vector<double> v_phi;  ///< noise variance per TF bin, F-major

  void validate() const;
};

/// Reverse-time grid tau_i = t_min + (i / N)(1 - t_min), i = N..1.
double tau_at(std::size_t i, std::size_t n_steps, const SdeSchedule& sched);

/// Euler-Maruyama reverse step:
/// s + gamma s dtau + g^2 S(s, tau) dtau + g sqrt(dtau) zeta.
ComplexSpectrogram predictor_step(const ComplexSpectrogram& s, double tau, double dtau,
                                  const ScoreModel& model, const SdeSchedule& sched, Rng& rng);
/// Langevin step with eps = sigma(tau)^2 / 4: s + eps S + sqrt(2 eps) zeta.
ComplexSpectrogram corrector_step(const ComplexSpectrogram& s, double tau,
                                  const ScoreModel& model, const SdeSchedule& sched, Rng& rng);

/// (1/delta)(x - s/delta) / (sigma^2/delta^2 + v) per bin.
ComplexSpectrogram pseudo_likelihood_score(const ComplexSpectrogram& s, double tau,
                                           const GuidanceContext& ctx,
                                           const SdeSchedule& sched);
/// Log-density of x under N_C(s/delta, sigma^2/delta^2 + v), summed over bins.
double pseudo_log_likelihood(const ComplexSpectrogram& s, double tau, const GuidanceContext& ctx,
                             const SdeSchedule& sched);

/// The change applied to s by one guidance update at tau.
ComplexSpectrogram guidance_increment(const ComplexSpectrogram& s, double tau,
                                      const GuidanceContext& ctx, const SdeSchedule& sched,
                                      const SamplerConfig& cfg);

/// Posterior sampling from s_1 ~ N_C(x, I): corrector, predictor and, when
/// i is a multiple of posterior_every, a guidance update.
ComplexSpectrogram posterior_sample(const GuidanceContext& ctx, const ScoreModel& model,
                                    const SdeSchedule& sched, const SamplerConfig& cfg, Rng& rng);

/// Prior sampling from s_1 ~ N_C(0, sigma(1)^2 I) without guidance.
ComplexSpectrogram unconditional_sample(std::size_t f_bins, std::size_t t_frames,
                                        const ScoreModel& model, const SdeSchedule& sched,
                                        const SamplerConfig& cfg, Rng& rng);

}  // namespace dpse
