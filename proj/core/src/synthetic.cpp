#include "dpse/synthetic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dpse {

std::vector<double> toy_prior_profile(std::size_t f_bins) {
  std::vector<double> p(f_bins);
  for (std::size_t f = 0; f < f_bins; ++f) {
    p[f] = 0.3 * std::exp(-static_cast<double>(f) / 20.0) + 0.001;
  }
  return p;
}

AnalyticGaussianPrior make_profile_prior(const std::vector<double>& profile,
                                         std::size_t t_frames, const SdeSchedule& sched) {
  AnalyticGaussianPrior prior{ComplexSpectrogram(profile.size(), t_frames), {}, sched};
  prior.var0.reserve(profile.size() * t_frames);
  for (double v : profile) prior.var0.insert(prior.var0.end(), t_frames, v);
  prior.validate();
  return prior;
}

GaussianPatchSource::GaussianPatchSource(std::vector<double> profile)
    : profile_(std::move(profile)) {
  if (profile_.empty()) throw std::invalid_argument("empty variance profile");
  for (double v : profile_) {
    if (!(v >= 0.0)) throw std::invalid_argument("variance profile must be >= 0");
  }
}

ComplexSpectrogram GaussianPatchSource::draw(Rng& rng, std::size_t patch_frames) {
  ComplexSpectrogram s = rng.complex_normal(profile_.size(), patch_frames);
  for (std::size_t f = 0; f < profile_.size(); ++f) {
    const double sd = std::sqrt(profile_[f]);
    for (std::size_t t = 0; t < patch_frames; ++t) s(f, t) *= sd;
  }
  return s;
}

NmfParams synthetic_noise_model(std::size_t f_bins, std::size_t t_frames, std::size_t rank,
                                std::uint64_t seed) {
  if (rank == 0 || f_bins == 0 || t_frames == 0) {
    throw std::invalid_argument("synthetic noise model needs positive dimensions");
  }
  NmfParams p;
  p.W.resize(static_cast<Eigen::Index>(f_bins), static_cast<Eigen::Index>(rank));
  p.H.resize(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(t_frames));
  const double width = static_cast<double>(f_bins) / 10.0;
  for (std::size_t k = 0; k < rank; ++k) {
    const double centre = static_cast<double>((k + 1) * f_bins) / static_cast<double>(rank + 1);
    for (std::size_t f = 0; f < f_bins; ++f) {
      const double z = (static_cast<double>(f) - centre) / width;
      p.W(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k)) = std::exp(-0.5 * z * z) + 0.01;
    }
  }
  Rng rng(seed);
  std::exponential_distribution<double> expo(1.0);
  for (Eigen::Index i = 0; i < p.H.size(); ++i) {
    p.H.data()[i] = std::max(expo(rng.engine()), kNmfFloor);
  }
  return p;
}

ComplexSpectrogram sample_noise(const NmfParams& model, Rng& rng) {
  const Eigen::MatrixXd V = model.variance();
  ComplexSpectrogram n = rng.complex_normal(static_cast<std::size_t>(V.rows()),
                                            static_cast<std::size_t>(V.cols()));
  for (Eigen::Index f = 0; f < V.rows(); ++f) {
    for (Eigen::Index t = 0; t < V.cols(); ++t) {
      n(static_cast<std::size_t>(f), static_cast<std::size_t>(t)) *= std::sqrt(V(f, t));
    }
  }
  return n;
}

}  // namespace dpse
