#include "dpse/sde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dpse {

void SdeSchedule::validate() const {
  // gamma == 0 is admitted: the pure VE limit is still a valid kernel.
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("SDE gamma must be finite and >= 0");
  }
  if (!(sigma_min > 0.0 && sigma_min < sigma_max) || !std::isfinite(sigma_max)) {
    throw std::invalid_argument("SDE requires 0 < sigma_min < sigma_max");
  }
  if (!(t_min > 0.0 && t_min < kTMax)) {
    throw std::invalid_argument("SDE requires 0 < t_min < 1");
  }
}

double SdeSchedule::log_ratio() const { return std::log(sigma_max / sigma_min); }

namespace {
void require_time(double t, const char* what) {
  if (!(t >= 0.0 && t <= SdeSchedule::kTMax)) {
    throw std::invalid_argument(std::string(what) + ": t=" + std::to_string(t) +
                                " outside [0, 1]");
  }
}
}  // namespace

ComplexSpectrogram drift(const ComplexSpectrogram& s_t, const SdeSchedule& sched) {
  if (!s_t.all_finite()) throw std::invalid_argument("drift: non-finite input");
  return -sched.gamma * s_t;
}

double diffusion_coeff(double t, const SdeSchedule& sched) {
  require_time(t, "diffusion_coeff");
  const double lead =
      sched.leading == DiffusionLeading::kSigmaMin ? sched.sigma_min : sched.sigma_max;
  const double ratio = sched.sigma_max / sched.sigma_min;
  return lead * std::pow(ratio, t) * std::sqrt(2.0 * sched.log_ratio());
}

KernelMoments kernel_moments(double t, const SdeSchedule& sched) {
  require_time(t, "kernel_moments");
  const double log_ratio = sched.log_ratio();
  const double delta = std::exp(-sched.gamma * t);
  const double ratio_pow = std::exp(2.0 * t * log_ratio);
  const double var = sched.sigma_min * sched.sigma_min * (ratio_pow - delta * delta) *
                     log_ratio / (sched.gamma + log_ratio);
  return {delta, std::max(var, 0.0)};
}

ComplexSpectrogram perturb(const ComplexSpectrogram& s0, double t, const SdeSchedule& sched,
                           Rng& rng) {
  const auto m = kernel_moments(t, sched);
  const double sd = std::sqrt(m.variance);
  ComplexSpectrogram out(s0.f_bins(), s0.t_frames());
  for (std::size_t i = 0; i < s0.size(); ++i) {
    out[i] = m.delta * s0[i] + sd * rng.complex_normal();
  }
  return out;
}

VarianceOdeReport check_variance_ode(const SdeSchedule& sched, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("check_variance_ode: steps must be positive");
  const auto rhs = [&](double t, double v) {
    const double g = diffusion_coeff(t, sched);
    return -2.0 * sched.gamma * v + g * g;
  };
  VarianceOdeReport report;
  report.steps = steps;
  const double h = SdeSchedule::kTMax / static_cast<double>(steps);
  double v = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const double k1 = rhs(t, v);
    const double k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1);
    const double k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2);
    const double k4 = rhs(std::min(t + h, SdeSchedule::kTMax), v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t_next = static_cast<double>(i + 1) * h;
    const double closed = kernel_moments(std::min(t_next, SdeSchedule::kTMax), sched).variance;
    const double rel = std::abs(v - closed) / std::max(std::abs(closed), 1e-300);
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_t = t_next;
    }
  }
  return report;
}

}  // namespace dpse
