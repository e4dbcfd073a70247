#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dpse/random.hpp"
#include "dpse/score.hpp"

namespace dpse {

struct ScoreNetConfig {
  std::size_t hidden = 32;
  std::size_t hidden_layers = 2;
  /// Number of sin/cos pairs encoding the normalized frequency-bin index.
  std::size_t freq_features = 3;
  /// Assumed clean-data variance; sets the input scale and the closed-form
  /// Gaussian skip term the network corrects.
  double data_variance = 0.1;
  double ema_decay = 0.999;

  static constexpr std::size_t kTimeFeatures = 3;

  void validate() const;
  std::size_t input_dim() const { return 2 + kTimeFeatures + 1 + 2 * freq_features; }
  std::size_t parameter_count() const;

  friend bool operator==(const ScoreNetConfig&, const ScoreNetConfig&) = default;
};

/// Small denoising score network applied independently to every TF bin.
///
/// Each bin is described by its scaled real/imag value, a log-sigma time
/// embedding and a sinusoidal embedding of its frequency index. An MLP maps
/// this to a two-channel output o, and
///
///   S(s, t) = o / sigma(t) - s / (delta_t^2 data_variance + sigma(t)^2).
///
/// Parameters are stored as float32; arithmetic is done in double. Inference
/// (evaluate) uses the exponential-moving-average copy of the weights.
class ToyScoreNet final : public ScoreModel {
 public:
  struct AdamState {
    std::vector<float> m;
    std::vector<float> v;
  };

  /// Forward record needed by backward().
  struct Tape {
    double t = 0.0;
    double sigma = 0.0;
    std::size_t f_bins = 0;
    std::size_t t_frames = 0;
    std::vector<Eigen::MatrixXd> pre;   ///< pre-activation of each layer
    std::vector<Eigen::MatrixXd> post;  ///< layer inputs (post[0] is the feature matrix)
  };

  ToyScoreNet(ScoreNetConfig cfg, SdeSchedule sched, std::uint64_t init_seed);
  /// Restores a network from stored weights (see checkpoint.hpp).
  ToyScoreNet(ScoreNetConfig cfg, SdeSchedule sched, std::vector<float> params,
              std::vector<float> ema, AdamState adam, std::uint64_t step);

  ComplexSpectrogram evaluate(const ComplexSpectrogram& s_t, double t) const override;
  const SdeSchedule& schedule() const override { return sched_; }

  /// Score using the live (training) weights.
  ComplexSpectrogram evaluate_live(const ComplexSpectrogram& s_t, double t) const;
  ComplexSpectrogram forward(std::span<const float> params, const ComplexSpectrogram& s_t,
                             double t, Tape* tape = nullptr) const;
  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(score), where
  /// the real/imag parts of grad_score are the derivatives with respect to
  /// the real/imag parts of the score.
  void backward(std::span<const float> params, const Tape& tape,
                const ComplexSpectrogram& grad_score, std::span<double> grad) const;

  const ScoreNetConfig& config() const { return cfg_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<const float> parameters() const { return params_; }
  std::span<float> mutable_parameters() { return params_; }
  std::span<const float> ema_parameters() const { return ema_; }
  std::span<float> mutable_ema_parameters() { return ema_; }
  const AdamState& adam_state() const { return adam_; }
  AdamState& adam_state() { return adam_; }
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t step) { step_ = step; }

  /// ema <- decay * ema + (1 - decay) * params.
  void update_ema();

 private:
  /// Feature columns for bins [begin, begin + x.cols()) in F-major order.
  void features(const ComplexSpectrogram& s_t, double t, std::size_t begin,
                Eigen::MatrixXd& x) const;

  ScoreNetConfig cfg_;
  SdeSchedule sched_;
  std::vector<float> params_;
  std::vector<float> ema_;
  AdamState adam_;
  std::uint64_t step_ = 0;
};

/// Source of clean training patches (F x patch_frames).
class PatchSource {
 public:
  virtual ~PatchSource() = default;
  virtual ComplexSpectrogram draw(Rng& rng, std::size_t patch_frames) = 0;
  /// Number of distinct items, or 0 for an unbounded generator.
  virtual std::size_t size_hint() const { return 0; }
};

/// Patches cut at random positions from a fixed set of clean spectrograms.
/// Items shorter than the patch are returned whole.
class SpectrogramDataset final : public PatchSource {
 public:
  explicit SpectrogramDataset(std::vector<ComplexSpectrogram> items);
  ComplexSpectrogram draw(Rng& rng, std::size_t patch_frames) override;
  std::size_t size_hint() const override { return items_.size(); }

 private:
  std::vector<ComplexSpectrogram> items_;
};

struct TrainBatch {
  std::vector<ComplexSpectrogram> s0;
  std::vector<double> t;
  std::vector<ComplexSpectrogram> zeta;

  std::size_t size() const { return s0.size(); }
  void validate(const SdeSchedule& sched) const;
};

/// Draws patches, times uniform on [t_min, 1] and N_C(0, I) noise.
TrainBatch make_batch(PatchSource& source, std::size_t batch_size, std::size_t patch_frames,
                      const SdeSchedule& sched, Rng& rng);

/// Scorer used by dsm_loss: receives the batch item index so that tests can
/// inject item-dependent oracles.
using BatchScoreFn =
    std::function<ComplexSpectrogram(std::size_t item, const ComplexSpectrogram& s_t, double t)>;

/// Mean over the batch of ||S(s_t, t) + zeta / sigma(t)||^2 with
/// s_t = delta_t s0 + sigma(t) zeta.
double dsm_loss(const BatchScoreFn& score, const TrainBatch& batch, const SdeSchedule& sched);
/// Same objective evaluated with the model's live weights.
double dsm_loss(const ToyScoreNet& model, const TrainBatch& batch, const SdeSchedule& sched);
/// Loss and its gradient with respect to `params` (grad is overwritten).
double dsm_loss_and_gradient(const ToyScoreNet& model, std::span<const float> params,
                             const TrainBatch& batch, std::span<double> grad);

enum class LrSchedule { kConstant, kCosine };

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 16;
  std::size_t patch_frames = 256;
  std::size_t epochs = 1;
  /// 0 means ceil(dataset size / batch size); required for generators.
  std::size_t steps_per_epoch = 0;
  LrSchedule lr_schedule = LrSchedule::kConstant;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t heldout_batch = 16;

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  double heldout_before = 0.0;
  double heldout_after = 0.0;
  std::uint64_t steps = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Adam on the live weights with an EMA update after every step. Throws
/// NumericError if the loss becomes non-finite.
TrainReport train(ToyScoreNet& model, PatchSource& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Mean |s|^2 over `patches` draws, used to set ScoreNetConfig::data_variance.
double estimate_data_variance(PatchSource& data, std::size_t patch_frames, std::size_t patches,
                              Rng& rng);

}  // namespace dpse
