#include "dpse/sampler.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dpse/error.hpp"

namespace dpse {

void SamplerConfig::validate() const {
  if (n_steps == 0) throw std::invalid_argument("sampler needs at least one reverse step");
  if (posterior_every == 0) throw std::invalid_argument("posterior_every must be >= 1");
  if (!(guidance_weight >= 0.0) || !std::isfinite(guidance_weight)) {
    throw std::invalid_argument("guidance weight must be finite and >= 0");
  }
}

void GuidanceContext::validate() const {
  if (v_phi.size() != x.size()) {
    throw std::invalid_argument("guidance noise variance does not match the mixture shape");
  }
  for (double v : v_phi) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("guidance noise variance must be finite and >= 0");
    }
  }
}

double tau_at(std::size_t i, std::size_t n_steps, const SdeSchedule& sched) {
  return sched.t_min +
         (static_cast<double>(i) / static_cast<double>(n_steps)) * (SdeSchedule::kTMax - sched.t_min);
}

namespace {

ComplexSpectrogram checked_score(const ScoreModel& model, const ComplexSpectrogram& s, double tau,
                                 const char* stage) {
  auto score = model.evaluate(s, tau);
  require_same_shape(score, s, "score model output");
  if (!score.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite score in " << stage << " at tau = " << tau
        << " (state energy " << s.energy() << ")";
    throw NumericError(msg.str());
  }
  return score;
}

void check_model_schedule(const ScoreModel& model, const SdeSchedule& sched) {
  if (!(model.schedule() == sched)) {
    throw std::invalid_argument("score model was built for a different SDE schedule");
  }
}

}  // namespace

ComplexSpectrogram predictor_step(const ComplexSpectrogram& s, double tau, double dtau,
                                  const ScoreModel& model, const SdeSchedule& sched, Rng& rng) {
  const auto score = checked_score(model, s, tau, "predictor");
  const double g = diffusion_coeff(tau, sched);
  const double noise = g * std::sqrt(dtau);
  ComplexSpectrogram out(s.f_bins(), s.t_frames());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = s[i] + sched.gamma * dtau * s[i] + g * g * dtau * score[i] + noise * rng.complex_normal();
  }
  return out;
}

ComplexSpectrogram corrector_step(const ComplexSpectrogram& s, double tau,
                                  const ScoreModel& model, const SdeSchedule& sched, Rng& rng) {
  const auto score = checked_score(model, s, tau, "corrector");
  const double eps = 0.25 * kernel_moments(tau, sched).variance;
  const double noise = std::sqrt(2.0 * eps);
  ComplexSpectrogram out(s.f_bins(), s.t_frames());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = s[i] + eps * score[i] + noise * rng.complex_normal();
  }
  return out;
}

ComplexSpectrogram pseudo_likelihood_score(const ComplexSpectrogram& s, double tau,
                                           const GuidanceContext& ctx,
                                           const SdeSchedule& sched) {
  require_same_shape(s, ctx.x, "pseudo-likelihood state");
  const auto m = kernel_moments(tau, sched);
  const double ratio = m.variance / (m.delta * m.delta);
  ComplexSpectrogram out(s.f_bins(), s.t_frames());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = (ctx.x[i] - s[i] / m.delta) / (m.delta * (ratio + ctx.v_phi[i]));
  }
  return out;
}

double pseudo_log_likelihood(const ComplexSpectrogram& s, double tau, const GuidanceContext& ctx,
                             const SdeSchedule& sched) {
  require_same_shape(s, ctx.x, "pseudo-likelihood state");
  const auto m = kernel_moments(tau, sched);
  const double ratio = m.variance / (m.delta * m.delta);
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double var = ratio + ctx.v_phi[i];
    total += -std::log(std::numbers::pi * var) - std::norm(ctx.x[i] - s[i] / m.delta) / var;
  }
  return total;
}

ComplexSpectrogram guidance_increment(const ComplexSpectrogram& s, double tau,
                                      const GuidanceContext& ctx, const SdeSchedule& sched,
                                      const SamplerConfig& cfg) {
  const double g = diffusion_coeff(tau, sched);
  const double step = cfg.guidance_weight * g * g;
  if (cfg.guidance_update == GuidanceUpdate::kExplicit) {
    auto inc = pseudo_likelihood_score(s, tau, ctx, sched);
    inc *= step;
    return inc;
  }
  // The score equals (delta x - s) / (sigma^2 + delta^2 v); solve
  // s' = s + step * (delta x - s') / (sigma^2 + delta^2 v) for s'.
  const auto m = kernel_moments(tau, sched);
  ComplexSpectrogram inc(s.f_bins(), s.t_frames());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = step / (m.variance + m.delta * m.delta * ctx.v_phi[i]);
    inc[i] = r / (1.0 + r) * (m.delta * ctx.x[i] - s[i]);
  }
  return inc;
}

namespace {

ComplexSpectrogram reverse_loop(ComplexSpectrogram s, const GuidanceContext* ctx,
                                const ScoreModel& model, const SdeSchedule& sched,
                                const SamplerConfig& cfg, Rng& rng) {
  const double dtau = (SdeSchedule::kTMax - sched.t_min) / static_cast<double>(cfg.n_steps);
  for (std::size_t i = cfg.n_steps; i >= 1; --i) {
    const double tau = tau_at(i, cfg.n_steps, sched);
    if (cfg.corrector_enabled) {
      for (std::size_t c = 0; c < cfg.corrector_steps; ++c) {
        s = corrector_step(s, tau, model, sched, rng);
      }
    }
    s = predictor_step(s, tau, dtau, model, sched, rng);
    if (ctx && cfg.guidance_weight > 0.0 && i % cfg.posterior_every == 0) {
      s += guidance_increment(s, tau, *ctx, sched, cfg);
    }
    if (!s.all_finite()) {
      std::ostringstream msg;
      msg << "sampler state became non-finite at step " << i << " (tau = " << tau << ")";
      throw NumericError(msg.str());
    }
  }
  if (cfg.final_denoise) {
    const auto m = kernel_moments(sched.t_min, sched);
    const auto score = checked_score(model, s, sched.t_min, "final denoise");
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] = (s[k] + m.variance * score[k]) / m.delta;
    }
  }
  return s;
}

}  // namespace

ComplexSpectrogram posterior_sample(const GuidanceContext& ctx, const ScoreModel& model,
                                    const SdeSchedule& sched, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  sched.validate();
  ctx.validate();
  check_model_schedule(model, sched);
  ComplexSpectrogram s = rng.complex_normal(ctx.x.f_bins(), ctx.x.t_frames());
  s += ctx.x;
  return reverse_loop(std::move(s), &ctx, model, sched, cfg, rng);
}

ComplexSpectrogram unconditional_sample(std::size_t f_bins, std::size_t t_frames,
                                        const ScoreModel& model, const SdeSchedule& sched,
                                        const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  sched.validate();
  check_model_schedule(model, sched);
  ComplexSpectrogram s = rng.complex_normal(f_bins, t_frames);
  s *= std::sqrt(kernel_moments(SdeSchedule::kTMax, sched).variance);
  return reverse_loop(std::move(s), nullptr, model, sched, cfg, rng);
}

}  // namespace dpse
