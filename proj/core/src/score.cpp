#include "dpse/score.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace dpse {

void AnalyticGaussianPrior::validate() const {
  if (var0.size() != mean.size()) {
    throw std::invalid_argument("gaussian prior: var0 size does not match mean");
  }
  for (double v : var0) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("gaussian prior: var0 must be finite and >= 0");
    }
  }
  sched.validate();
}

std::vector<double> AnalyticGaussianPrior::marginal_variance(double t) const {
  const auto m = kernel_moments(t, sched);
  std::vector<double> out(var0.size());
  for (std::size_t i = 0; i < var0.size(); ++i) {
    out[i] = m.delta * m.delta * var0[i] + m.variance;
  }
  return out;
}

namespace {

double diag_gaussian_log_density(const ComplexSpectrogram& s, const ComplexSpectrogram& mean,
                                 double delta, std::span<const double> var0, double kernel_var) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = delta * delta * var0[i] + kernel_var;
    acc -= std::log(std::numbers::pi * v) + std::norm(s[i] - delta * mean[i]) / v;
  }
  return acc;
}

}  // namespace

double AnalyticGaussianPrior::log_density(const ComplexSpectrogram& s_t, double t) const {
  require_same_shape(s_t, mean, "gaussian log_density");
  const auto m = kernel_moments(t, sched);
  return diag_gaussian_log_density(s_t, mean, m.delta, var0, m.variance);
}

ComplexSpectrogram gaussian_score(const ComplexSpectrogram& s_t, double t,
                                  const AnalyticGaussianPrior& prior) {
  require_same_shape(s_t, prior.mean, "gaussian_score");
  const auto m = kernel_moments(t, prior.sched);
  ComplexSpectrogram out(s_t.f_bins(), s_t.t_frames());
  for (std::size_t i = 0; i < s_t.size(); ++i) {
    const double v = m.delta * m.delta * prior.var0[i] + m.variance;
    if (v <= 0.0) {
      throw std::invalid_argument("gaussian_score: zero marginal variance (t=0 with var0=0)");
    }
    out[i] = (m.delta * prior.mean[i] - s_t[i]) / v;
  }
  return out;
}

GaussianPriorScore::GaussianPriorScore(AnalyticGaussianPrior prior) : prior_(std::move(prior)) {
  prior_.validate();
}

ComplexSpectrogram GaussianPriorScore::evaluate(const ComplexSpectrogram& s_t, double t) const {
  return gaussian_score(s_t, t, prior_);
}

namespace {

void validate_components(const std::vector<MixtureComponent>& components,
                         const ComplexSpectrogram& s_t) {
  if (components.empty()) throw std::invalid_argument("gmm: empty component list");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("gmm: weights must be positive");
    require_same_shape(s_t, c.mean, "gmm component");
    if (c.var0.size() != c.mean.size()) {
      throw std::invalid_argument("gmm: component var0 size does not match mean");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("gmm: weights must sum to 1");
}

std::vector<double> softmax(std::vector<double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - top);
    sum += l;
  }
  for (auto& l : logits) l /= sum;
  return logits;
}

}  // namespace

std::vector<double> mixture_log_terms(const ComplexSpectrogram& s_t, double t,
                                      const std::vector<MixtureComponent>& components,
                                      const SdeSchedule& sched) {
  validate_components(components, s_t);
  const auto m = kernel_moments(t, sched);
  std::vector<double> terms;
  terms.reserve(components.size());
  for (const auto& c : components) {
    terms.push_back(std::log(c.weight) +
                    diag_gaussian_log_density(s_t, c.mean, m.delta, c.var0, m.variance));
  }
  return terms;
}

double mixture_log_density(const ComplexSpectrogram& s_t, double t,
                           const std::vector<MixtureComponent>& components,
                           const SdeSchedule& sched) {
  const auto terms = mixture_log_terms(s_t, t, components, sched);
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double l : terms) sum += std::exp(l - top);
  return top + std::log(sum);
}

std::vector<double> mixture_responsibilities(const ComplexSpectrogram& s_t, double t,
                                             const std::vector<MixtureComponent>& components,
                                             const SdeSchedule& sched) {
  return softmax(mixture_log_terms(s_t, t, components, sched));
}

ComplexSpectrogram gmm_score(const ComplexSpectrogram& s_t, double t,
                             const std::vector<MixtureComponent>& components,
                             const SdeSchedule& sched) {
  const auto resp = mixture_responsibilities(s_t, t, components, sched);
  const auto m = kernel_moments(t, sched);
  ComplexSpectrogram out(s_t.f_bins(), s_t.t_frames());
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    for (std::size_t i = 0; i < s_t.size(); ++i) {
      const double v = m.delta * m.delta * c.var0[i] + m.variance;
      if (v <= 0.0) throw std::invalid_argument("gmm_score: zero marginal variance");
      out[i] += resp[k] * (m.delta * c.mean[i] - s_t[i]) / v;
    }
  }
  return out;
}

GaussianMixtureScore::GaussianMixtureScore(std::vector<MixtureComponent> components,
                                           SdeSchedule sched)
    : components_(std::move(components)), sched_(sched) {
  sched_.validate();
  if (components_.empty()) throw std::invalid_argument("gmm: empty component list");
  validate_components(components_, components_.front().mean);
}

ComplexSpectrogram GaussianMixtureScore::evaluate(const ComplexSpectrogram& s_t,
                                                  double t) const {
  return gmm_score(s_t, t, components_, sched_);
}

}  // namespace dpse
