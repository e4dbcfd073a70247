#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "dpse/spectrogram.hpp"

namespace dpse {

/// Floor applied to W, H and V = WH.
inline constexpr double kNmfFloor = 1e-10;

/// Low-rank noise variance model V = W H (F x r times r x T).
struct NmfParams {
  Eigen::MatrixXd W;
  Eigen::MatrixXd H;

  std::size_t rank() const { return static_cast<std::size_t>(W.cols()); }
  /// W H with entries floored at kNmfFloor.
  Eigen::MatrixXd variance() const;
  /// variance() flattened F-major, matching ComplexSpectrogram indexing.
  std::vector<double> variance_flat() const;
  void validate() const;
};

/// Uniform positive entries, rescaled so that mean(W H) == power_scale.
NmfParams init_nmf(std::size_t f_bins, std::size_t t_frames, std::size_t rank,
                   double power_scale, std::uint64_t seed);

/// P_ft = |x_ft - s_hat_ft|^2 as an F x T matrix.
Eigen::MatrixXd residual_power(const ComplexSpectrogram& x, const ComplexSpectrogram& s_hat);

/// sum_ft P_ft / V_ft + log V_ft.
double is_objective(const Eigen::MatrixXd& P, const NmfParams& params);

/// One multiplicative Itakura-Saito update of W, then (with V refreshed) H.
NmfParams update_step(const Eigen::MatrixXd& P, const NmfParams& params);

/// Runs n_updates updates on the residual power of (x, s_hat). If `trace`
/// is given it receives the objective before the first and after every
/// update (n_updates + 1 values).
NmfParams m_step(const ComplexSpectrogram& x, const ComplexSpectrogram& s_hat,
                 const NmfParams& params, std::size_t n_updates,
                 std::vector<double>* trace = nullptr);

/// Dumps W and H in the binary grid format (imaginary parts zero).
void write_nmf(const NmfParams& params, const std::string& w_path, const std::string& h_path);

}  // namespace dpse
