#pragma once

#include <vector>

#include "dpse/sde.hpp"
#include "dpse/spectrogram.hpp"

namespace dpse {

/// Time-dependent estimate of grad log p_t(s_t).
///
/// Convention: the real and imaginary parts of the returned array are the
/// partial derivatives of log p_t with respect to Re(s_t) and Im(s_t), halved.
/// Under this convention the score of N_C(m, v) is (m - s) / v, and Langevin
/// and Euler-Maruyama updates driven by N_C(0, I) noise need no extra factors.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual ComplexSpectrogram evaluate(const ComplexSpectrogram& s_t, double t) const = 0;
  virtual const SdeSchedule& schedule() const = 0;
};

/// Independent per-entry Gaussian prior p(s_0) = N_C(mean, diag(var0)).
/// Perturbed through the SDE kernel it stays Gaussian, so the score at every
/// t is available in closed form.
struct AnalyticGaussianPrior {
  ComplexSpectrogram mean;
  std::vector<double> var0;  ///< one entry per TF bin, >= 0
  SdeSchedule sched;

  void validate() const;
  /// Marginal variance delta_t^2 var0 + sigma(t)^2 per entry.
  std::vector<double> marginal_variance(double t) const;
  /// Explicit log-density of the perturbed marginal at time t.
  double log_density(const ComplexSpectrogram& s_t, double t) const;
};

ComplexSpectrogram gaussian_score(const ComplexSpectrogram& s_t, double t,
                                  const AnalyticGaussianPrior& prior);

class GaussianPriorScore final : public ScoreModel {
 public:
  explicit GaussianPriorScore(AnalyticGaussianPrior prior);
  ComplexSpectrogram evaluate(const ComplexSpectrogram& s_t, double t) const override;
  const SdeSchedule& schedule() const override { return prior_.sched; }
  const AnalyticGaussianPrior& prior() const { return prior_; }

 private:
  AnalyticGaussianPrior prior_;
};

/// One component of a joint mixture over the whole spectrogram: each
/// component is a diagonal complex Gaussian.
struct MixtureComponent {
  double weight = 1.0;
  ComplexSpectrogram mean;
  std::vector<double> var0;
};

/// Per-component log-likelihood of s_t under the perturbed components,
/// including log weights (the log-sum-exp operands).
std::vector<double> mixture_log_terms(const ComplexSpectrogram& s_t, double t,
                                      const std::vector<MixtureComponent>& components,
                                      const SdeSchedule& sched);
double mixture_log_density(const ComplexSpectrogram& s_t, double t,
                           const std::vector<MixtureComponent>& components,
                           const SdeSchedule& sched);
/// Posterior component responsibilities given s_t.
std::vector<double> mixture_responsibilities(const ComplexSpectrogram& s_t, double t,
                                             const std::vector<MixtureComponent>& components,
                                             const SdeSchedule& sched);

ComplexSpectrogram gmm_score(const ComplexSpectrogram& s_t, double t,
                             const std::vector<MixtureComponent>& components,
                             const SdeSchedule& sched);

class GaussianMixtureScore final : public ScoreModel {
 public:
  GaussianMixtureScore(std::vector<MixtureComponent> components, SdeSchedule sched);
  ComplexSpectrogram evaluate(const ComplexSpectrogram& s_t, double t) const override;
  const SdeSchedule& schedule() const override { return sched_; }
  const std::vector<MixtureComponent>& components() const { return components_; }

 private:
  std::vector<MixtureComponent> components_;
  SdeSchedule sched_;
};

}  // namespace dpse
