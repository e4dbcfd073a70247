#pragma once

#include <cstddef>

#include "dpse/random.hpp"
#include "dpse/spectrogram.hpp"

namespace dpse {

/// Leading coefficient of the diffusion term g(t). kSigmaMin makes the
/// closed-form kernel variance the exact solution of the variance ODE;
/// kSigmaMax is kept only so the inconsistency can be demonstrated.
enum class DiffusionLeading { kSigmaMin, kSigmaMax };

/// Variance-exploding SDE with mean-reverting drift f(s) = -gamma * s and
/// g(t) = sigma_min * (sigma_max/sigma_min)^t * sqrt(2 log(sigma_max/sigma_min)).
struct SdeSchedule {
  double gamma = 1.5;
  double sigma_min = 0.05;
  double sigma_max = 0.5;
  double t_min = 0.03;
  DiffusionLeading leading = DiffusionLeading::kSigmaMin;

  static constexpr double kTMax = 1.0;

  void validate() const;
  double log_ratio() const;

  friend bool operator==(const SdeSchedule&, const SdeSchedule&) = default;
};

struct KernelMoments {
  double delta = 1.0;     ///< mean scale exp(-gamma t)
  double variance = 0.0;  ///< sigma(t)^2
};

ComplexSpectrogram drift(const ComplexSpectrogram& s_t, const SdeSchedule& sched);
double diffusion_coeff(double t, const SdeSchedule& sched);
KernelMoments kernel_moments(double t, const SdeSchedule& sched);

/// Draws s_t ~ N_C(delta_t s_0, sigma(t)^2 I).
ComplexSpectrogram perturb(const ComplexSpectrogram& s0, double t,
                           const SdeSchedule& sched, Rng& rng);

struct VarianceOdeReport {
  double max_rel_error = 0.0;
  double worst_t = 0.0;
  std::size_t steps = 0;
};

/// Integrates d(var)/dt = -2 gamma var + g(t)^2 from var(0) = 0 with RK4 and
/// compares against kernel_moments() on every grid point with t > 0.
VarianceOdeReport check_variance_ode(const SdeSchedule& sched, std::size_t steps = 10000);

}  // namespace dpse
