#include "dpse/nmf.hpp"

#include <cmath>
#include <stdexcept>

#include "dpse/error.hpp"
#include "dpse/random.hpp"

namespace dpse {

Eigen::MatrixXd NmfParams::variance() const {
  return (W * H).cwiseMax(kNmfFloor);
}

std::vector<double> NmfParams::variance_flat() const {
  const Eigen::MatrixXd V = variance();
  std::vector<double> out(static_cast<std::size_t>(V.size()));
  std::size_t k = 0;
  for (Eigen::Index f = 0; f < V.rows(); ++f) {
    for (Eigen::Index t = 0; t < V.cols(); ++t) out[k++] = V(f, t);
  }
  return out;
}

void NmfParams::validate() const {
  if (W.cols() == 0 || W.cols() != H.rows() || W.rows() == 0 || H.cols() == 0) {
    throw std::invalid_argument("NMF factors have inconsistent shapes");
  }
  if (!W.allFinite() || !H.allFinite() || W.minCoeff() < kNmfFloor || H.minCoeff() < kNmfFloor) {
    throw std::invalid_argument("NMF factors must be finite and >= the floor");
  }
}

NmfParams init_nmf(std::size_t f_bins, std::size_t t_frames, std::size_t rank,
                   double power_scale, std::uint64_t seed) {
  if (rank == 0) throw std::invalid_argument("NMF rank must be >= 1");
  if (rank > std::min(f_bins, t_frames)) {
    throw std::invalid_argument("NMF rank " + std::to_string(rank) + " exceeds min(F, T) = " +
                                std::to_string(std::min(f_bins, t_frames)));
  }
  if (!(power_scale > 0.0) || !std::isfinite(power_scale)) {
    throw std::invalid_argument("NMF power scale must be positive");
  }
  Rng rng(seed);
  NmfParams p;
  p.W.resize(static_cast<Eigen::Index>(f_bins), static_cast<Eigen::Index>(rank));
  p.H.resize(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(t_frames));
  for (Eigen::Index i = 0; i < p.W.size(); ++i) p.W.data()[i] = rng.uniform(0.1, 1.0);
  for (Eigen::Index i = 0; i < p.H.size(); ++i) p.H.data()[i] = rng.uniform(0.1, 1.0);
  const double gain = std::sqrt(power_scale / (p.W * p.H).mean());
  p.W = (p.W * gain).cwiseMax(kNmfFloor);
  p.H = (p.H * gain).cwiseMax(kNmfFloor);
  return p;
}

Eigen::MatrixXd residual_power(const ComplexSpectrogram& x, const ComplexSpectrogram& s_hat) {
  require_same_shape(x, s_hat, "residual power");
  Eigen::MatrixXd P(static_cast<Eigen::Index>(x.f_bins()), static_cast<Eigen::Index>(x.t_frames()));
  for (std::size_t f = 0; f < x.f_bins(); ++f) {
    for (std::size_t t = 0; t < x.t_frames(); ++t) {
      P(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t)) = std::norm(x(f, t) - s_hat(f, t));
    }
  }
  return P;
}

namespace {

void check_shapes(const Eigen::MatrixXd& P, const NmfParams& params) {
  if (P.rows() != params.W.rows() || P.cols() != params.H.cols()) {
    throw std::invalid_argument("residual power shape does not match the NMF factors");
  }
}

}  // namespace

double is_objective(const Eigen::MatrixXd& P, const NmfParams& params) {
  check_shapes(P, params);
  const Eigen::MatrixXd V = params.variance();
  return (P.array() / V.array() + V.array().log()).sum();
}

NmfParams update_step(const Eigen::MatrixXd& P, const NmfParams& params) {
  check_shapes(P, params);
  NmfParams out = params;

  Eigen::MatrixXd V = out.variance();
  Eigen::MatrixXd Vinv = V.cwiseInverse();
  Eigen::MatrixXd num = (P.cwiseProduct(Vinv).cwiseProduct(Vinv)) * out.H.transpose();
  Eigen::MatrixXd den = Vinv * out.H.transpose();
  out.W = out.W.cwiseProduct(num.cwiseQuotient(den)).cwiseMax(kNmfFloor);

  V = out.variance();
  Vinv = V.cwiseInverse();
  num = out.W.transpose() * (P.cwiseProduct(Vinv).cwiseProduct(Vinv));
  den = out.W.transpose() * Vinv;
  out.H = out.H.cwiseProduct(num.cwiseQuotient(den)).cwiseMax(kNmfFloor);

  if (!out.W.allFinite() || !out.H.allFinite()) {
    throw NumericError("IS-NMF update produced non-finite factors");
  }
  return out;
}

NmfParams m_step(const ComplexSpectrogram& x, const ComplexSpectrogram& s_hat,
                 const NmfParams& params, std::size_t n_updates, std::vector<double>* trace) {
  const Eigen::MatrixXd P = residual_power(x, s_hat);
  NmfParams cur = params;
  if (trace) {
    trace->clear();
    trace->push_back(is_objective(P, cur));
  }
  for (std::size_t k = 0; k < n_updates; ++k) {
    cur = update_step(P, cur);
    if (trace) trace->push_back(is_objective(P, cur));
  }
  return cur;
}

namespace {

ComplexSpectrogram as_grid(const Eigen::MatrixXd& m) {
  ComplexSpectrogram g(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      g(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = m(r, c);
    }
  }
  return g;
}

}  // namespace

void write_nmf(const NmfParams& params, const std::string& w_path, const std::string& h_path) {
  write_grid(w_path, as_grid(params.W));
  write_grid(h_path, as_grid(params.H));
}

}  // namespace dpse
