#include "dpse/score_net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dpse/error.hpp"

namespace dpse {

void ScoreNetConfig::validate() const {
  if (hidden == 0 || hidden_layers == 0) {
    throw std::invalid_argument("score net needs at least one hidden layer of width >= 1");
  }
  if (!(data_variance > 0.0) || !std::isfinite(data_variance)) {
    throw std::invalid_argument("score net data_variance must be positive");
  }
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) {
    throw std::invalid_argument("score net ema_decay must lie in [0, 1)");
  }
}

namespace {

struct LayerShape {
  std::size_t in;
  std::size_t out;
};

std::vector<LayerShape> layer_shapes(const ScoreNetConfig& cfg) {
  std::vector<LayerShape> shapes;
  shapes.push_back({cfg.input_dim(), cfg.hidden});
  for (std::size_t i = 1; i < cfg.hidden_layers; ++i) shapes.push_back({cfg.hidden, cfg.hidden});
  shapes.push_back({cfg.hidden, 2});
  return shapes;
}

// Weights of layer l are stored row-major (out x in) followed by the bias.
std::vector<std::size_t> layer_offsets(const std::vector<LayerShape>& shapes) {
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& s : shapes) {
    offsets.push_back(off);
    off += s.out * s.in + s.out;
  }
  offsets.push_back(off);
  return offsets;
}

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMajorMatrix load_weights(std::span<const float> params, std::size_t off, const LayerShape& s) {
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
      params.data() + off, static_cast<Eigen::Index>(s.out), static_cast<Eigen::Index>(s.in));
  return w.cast<double>();
}

Eigen::VectorXd load_bias(std::span<const float> params, std::size_t off, const LayerShape& s) {
  Eigen::Map<const Eigen::VectorXf> b(params.data() + off + s.out * s.in,
                                      static_cast<Eigen::Index>(s.out));
  return b.cast<double>();
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::size_t ScoreNetConfig::parameter_count() const {
  return layer_offsets(layer_shapes(*this)).back();
}

ToyScoreNet::ToyScoreNet(ScoreNetConfig cfg, SdeSchedule sched, std::uint64_t init_seed)
    : cfg_(cfg), sched_(sched) {
  cfg_.validate();
  sched_.validate();
  const auto shapes = layer_shapes(cfg_);
  const auto offsets = layer_offsets(shapes);
  params_.assign(offsets.back(), 0.0f);
  Rng rng(init_seed);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(shapes[l].in));
    for (std::size_t i = offsets[l]; i < offsets[l + 1]; ++i) {
      params_[i] = static_cast<float>(rng.uniform(-bound, bound));
    }
  }
  ema_ = params_;
  adam_.m.assign(params_.size(), 0.0f);
  adam_.v.assign(params_.size(), 0.0f);
}

ToyScoreNet::ToyScoreNet(ScoreNetConfig cfg, SdeSchedule sched, std::vector<float> params,
                         std::vector<float> ema, AdamState adam, std::uint64_t step)
    : cfg_(cfg),
      sched_(sched),
      params_(std::move(params)),
      ema_(std::move(ema)),
      adam_(std::move(adam)),
      step_(step) {
  cfg_.validate();
  sched_.validate();
  const std::size_t n = cfg_.parameter_count();
  if (params_.size() != n || ema_.size() != n || adam_.m.size() != n || adam_.v.size() != n) {
    throw std::invalid_argument("score net: stored parameter count does not match architecture");
  }
}

void ToyScoreNet::features(const ComplexSpectrogram& s_t, double t, std::size_t begin,
                           Eigen::MatrixXd& x) const {
  const auto m = kernel_moments(t, sched_);
  const double c_in = 1.0 / std::sqrt(m.delta * m.delta * cfg_.data_variance + m.variance);
  const double u = 0.5 * std::log(m.variance);
  const double su = std::sin(u);
  const double cu = std::cos(u);
  const double F = static_cast<double>(s_t.f_bins());
  const std::size_t T = s_t.t_frames();

  std::size_t cached_f = static_cast<std::size_t>(-1);
  for (Eigen::Index col = 0; col < x.cols(); ++col) {
    const std::size_t idx = begin + static_cast<std::size_t>(col);
    const std::size_t f = idx / T;
    const Complex s = s_t[idx];
    x(0, col) = c_in * s.real();
    x(1, col) = c_in * s.imag();
    x(2, col) = 0.25 * u;
    x(3, col) = su;
    x(4, col) = cu;
    if (f == cached_f) {
      x.block(5, col, x.rows() - 5, 1) = x.block(5, col - 1, x.rows() - 5, 1);
      continue;
    }
    cached_f = f;
    const double nu = static_cast<double>(f) / F;
    x(5, col) = nu;
    double scale = std::numbers::pi;
    for (std::size_t j = 0; j < cfg_.freq_features; ++j, scale *= 2.0) {
      x(static_cast<Eigen::Index>(6 + 2 * j), col) = std::sin(scale * nu);
      x(static_cast<Eigen::Index>(7 + 2 * j), col) = std::cos(scale * nu);
    }
  }
}

ComplexSpectrogram ToyScoreNet::forward(std::span<const float> params,
                                        const ComplexSpectrogram& s_t, double t,
                                        Tape* tape) const {
  if (!(t > 0.0 && t <= SdeSchedule::kTMax)) {
    throw std::invalid_argument("score net: t must lie in (0, 1]");
  }
  if (params.size() != params_.size()) {
    throw std::invalid_argument("score net: parameter span has the wrong size");
  }
  const auto m = kernel_moments(t, sched_);
  const double sigma = std::sqrt(m.variance);
  const double skip = 1.0 / (m.delta * m.delta * cfg_.data_variance + m.variance);

  const auto shapes = layer_shapes(cfg_);
  const auto offsets = layer_offsets(shapes);
  std::vector<RowMajorMatrix> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    weights.push_back(load_weights(params, offsets[l], shapes[l]));
    biases.push_back(load_bias(params, offsets[l], shapes[l]));
  }
  if (tape) {
    tape->t = t;
    tape->sigma = sigma;
    tape->f_bins = s_t.f_bins();
    tape->t_frames = s_t.t_frames();
    tape->pre.clear();
    tape->post.clear();
  }

  // Without a tape the bins are processed in cache-sized column blocks.
  const std::size_t total = s_t.size();
  const std::size_t block = tape ? total : std::min<std::size_t>(total, 512);
  ComplexSpectrogram out(s_t.f_bins(), s_t.t_frames());
  Eigen::MatrixXd a;
  Eigen::MatrixXd z;
  for (std::size_t begin = 0; begin < total; begin += block) {
    const auto cols = static_cast<Eigen::Index>(std::min(block, total - begin));
    a.resize(static_cast<Eigen::Index>(cfg_.input_dim()), cols);
    features(s_t, t, begin, a);
    for (std::size_t l = 0; l < shapes.size(); ++l) {
      z.noalias() = weights[l] * a;
      z.colwise() += biases[l];
      if (tape) tape->post.push_back(std::move(a));
      if (l + 1 < shapes.size()) {
        a = z.array() / (1.0 + (-z.array()).exp());
        if (tape) tape->pre.push_back(std::move(z));
      } else {
        a.swap(z);
      }
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const std::size_t i = begin + static_cast<std::size_t>(c);
      out[i] = Complex(a(0, c), a(1, c)) / sigma - skip * s_t[i];
    }
  }
  return out;
}

void ToyScoreNet::backward(std::span<const float> params, const Tape& tape,
                           const ComplexSpectrogram& grad_score, std::span<double> grad) const {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("score net: gradient span has the wrong size");
  }
  const auto shapes = layer_shapes(cfg_);
  const auto offsets = layer_offsets(shapes);
  const auto n = static_cast<Eigen::Index>(grad_score.size());

  Eigen::MatrixXd dz(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dz(0, i) = grad_score[static_cast<std::size_t>(i)].real() / tape.sigma;
    dz(1, i) = grad_score[static_cast<std::size_t>(i)].imag() / tape.sigma;
  }
  for (std::size_t l = shapes.size(); l-- > 0;) {
    const auto& s = shapes[l];
    const Eigen::MatrixXd dw = dz * tape.post[l].transpose();
    const Eigen::VectorXd db = dz.rowwise().sum();
    for (std::size_t r = 0; r < s.out; ++r) {
      for (std::size_t c = 0; c < s.in; ++c) {
        grad[offsets[l] + r * s.in + c] +=
            dw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
      grad[offsets[l] + s.out * s.in + r] += db(static_cast<Eigen::Index>(r));
    }
    if (l == 0) break;
    const auto w = load_weights(params, offsets[l], s);
    Eigen::MatrixXd da = w.transpose() * dz;
    const auto& z = tape.pre[l - 1];
    dz = da.binaryExpr(z, [](double g, double v) {
      const double sg = logistic(v);
      return g * sg * (1.0 + v * (1.0 - sg));
    });
  }
}

ComplexSpectrogram ToyScoreNet::evaluate(const ComplexSpectrogram& s_t, double t) const {
  return forward(ema_, s_t, t);
}

ComplexSpectrogram ToyScoreNet::evaluate_live(const ComplexSpectrogram& s_t, double t) const {
  return forward(params_, s_t, t);
}

void ToyScoreNet::update_ema() {
  const double d = cfg_.ema_decay;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ema_[i] = static_cast<float>(d * ema_[i] + (1.0 - d) * params_[i]);
  }
}

SpectrogramDataset::SpectrogramDataset(std::vector<ComplexSpectrogram> items)
    : items_(std::move(items)) {
  if (items_.empty()) throw std::invalid_argument("training dataset is empty");
  for (const auto& it : items_) {
    if (it.f_bins() != items_.front().f_bins()) {
      throw std::invalid_argument("training dataset mixes different frequency resolutions");
    }
  }
}

ComplexSpectrogram SpectrogramDataset::draw(Rng& rng, std::size_t patch_frames) {
  const auto& item = items_[rng.index(items_.size())];
  if (item.t_frames() <= patch_frames) return item;
  const std::size_t start = rng.index(item.t_frames() - patch_frames + 1);
  ComplexSpectrogram patch(item.f_bins(), patch_frames);
  for (std::size_t f = 0; f < item.f_bins(); ++f) {
    for (std::size_t k = 0; k < patch_frames; ++k) patch(f, k) = item(f, start + k);
  }
  return patch;
}

void TrainBatch::validate(const SdeSchedule& sched) const {
  if (s0.empty()) throw std::invalid_argument("training batch is empty");
  if (t.size() != s0.size() || zeta.size() != s0.size()) {
    throw std::invalid_argument("training batch fields have inconsistent lengths");
  }
  for (std::size_t i = 0; i < s0.size(); ++i) {
    require_same_shape(s0[i], s0.front(), "training batch patch");
    require_same_shape(s0[i], zeta[i], "training batch noise");
    if (!(t[i] >= sched.t_min && t[i] <= SdeSchedule::kTMax)) {
      throw std::invalid_argument("training time " + std::to_string(t[i]) +
                                  " is outside [t_min, 1]");
    }
  }
}

TrainBatch make_batch(PatchSource& source, std::size_t batch_size, std::size_t patch_frames,
                      const SdeSchedule& sched, Rng& rng) {
  TrainBatch batch;
  for (std::size_t i = 0; i < batch_size; ++i) {
    auto s0 = source.draw(rng, patch_frames);
    batch.t.push_back(rng.uniform(sched.t_min, SdeSchedule::kTMax));
    batch.zeta.push_back(rng.complex_normal(s0.f_bins(), s0.t_frames()));
    batch.s0.push_back(std::move(s0));
  }
  return batch;
}

namespace {

ComplexSpectrogram perturbed_state(const TrainBatch& batch, std::size_t i,
                                   const KernelMoments& m) {
  const double sd = std::sqrt(m.variance);
  ComplexSpectrogram st(batch.s0[i].f_bins(), batch.s0[i].t_frames());
  for (std::size_t k = 0; k < st.size(); ++k) {
    st[k] = m.delta * batch.s0[i][k] + sd * batch.zeta[i][k];
  }
  return st;
}

}  // namespace

double dsm_loss(const BatchScoreFn& score, const TrainBatch& batch, const SdeSchedule& sched) {
  batch.validate(sched);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto m = kernel_moments(batch.t[i], sched);
    const double inv_sd = 1.0 / std::sqrt(m.variance);
    const auto st = perturbed_state(batch, i, m);
    const auto s = score(i, st, batch.t[i]);
    require_same_shape(s, st, "dsm_loss score");
    double item = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) item += std::norm(s[k] + inv_sd * batch.zeta[i][k]);
    total += item;
  }
  return total / static_cast<double>(batch.size());
}

double dsm_loss(const ToyScoreNet& model, const TrainBatch& batch, const SdeSchedule& sched) {
  if (!(model.schedule() == sched)) {
    throw std::invalid_argument("dsm_loss: model schedule differs from the supplied schedule");
  }
  return dsm_loss(
      [&](std::size_t, const ComplexSpectrogram& st, double t) { return model.evaluate_live(st, t); },
      batch, sched);
}

double dsm_loss_and_gradient(const ToyScoreNet& model, std::span<const float> params,
                             const TrainBatch& batch, std::span<double> grad) {
  const auto& sched = model.schedule();
  batch.validate(sched);
  std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  ToyScoreNet::Tape tape;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto m = kernel_moments(batch.t[i], sched);
    const double inv_sd = 1.0 / std::sqrt(m.variance);
    const auto st = perturbed_state(batch, i, m);
    auto residual = model.forward(params, st, batch.t[i], &tape);
    double item = 0.0;
    for (std::size_t k = 0; k < residual.size(); ++k) {
      residual[k] += inv_sd * batch.zeta[i][k];
      item += std::norm(residual[k]);
      residual[k] *= 2.0 * inv_b;
    }
    total += item;
    model.backward(params, tape, residual, grad);
  }
  return total * inv_b;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (patch_frames == 0) throw std::invalid_argument("patch frames must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
}

TrainReport train(ToyScoreNet& model, PatchSource& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  const auto& sched = model.schedule();
  std::size_t steps_per_epoch = cfg.steps_per_epoch;
  if (steps_per_epoch == 0) {
    if (data.size_hint() == 0) {
      throw std::invalid_argument("steps_per_epoch is required for generator data sources");
    }
    steps_per_epoch = (data.size_hint() + cfg.batch_size - 1) / cfg.batch_size;
  }

  TrainReport report;
  Rng heldout_rng(split_seed(cfg.seed, 0xBEEFu));
  const auto heldout = make_batch(data, cfg.heldout_batch, cfg.patch_frames, sched, heldout_rng);
  report.heldout_before = dsm_loss(model, heldout, sched);

  const std::size_t total_steps = cfg.epochs * steps_per_epoch;
  std::vector<double> grad(model.parameter_count());
  auto& adam = model.adam_state();
  auto params = model.mutable_parameters();
  std::size_t local_step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t k = 0; k < steps_per_epoch; ++k, ++local_step) {
      const std::uint64_t global = model.step() + 1;
      Rng rng(split_seed(cfg.seed, global));
      const auto batch = make_batch(data, cfg.batch_size, cfg.patch_frames, sched, rng);
      const double loss = dsm_loss_and_gradient(model, params, batch, grad);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "training diverged at step " << global << " (epoch " << epoch
            << "): loss = " << loss;
        throw NumericError(msg.str());
      }
      epoch_loss += loss;

      double lr = cfg.learning_rate;
      if (cfg.lr_schedule == LrSchedule::kCosine) {
        lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(local_step) /
                                    static_cast<double>(total_steps)));
      }
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(global));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(global));
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        const double m = cfg.beta1 * adam.m[i] + (1.0 - cfg.beta1) * g;
        const double v = cfg.beta2 * adam.v[i] + (1.0 - cfg.beta2) * g * g;
        adam.m[i] = static_cast<float>(m);
        adam.v[i] = static_cast<float>(v);
        params[i] = static_cast<float>(params[i] - lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps));
      }
      model.update_ema();
      model.set_step(global);
      ++report.steps;
    }
    epoch_loss /= static_cast<double>(steps_per_epoch);
    report.epoch_loss.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  report.heldout_after = dsm_loss(model, heldout, sched);
  return report;
}

double estimate_data_variance(PatchSource& data, std::size_t patch_frames, std::size_t patches,
                              Rng& rng) {
  if (patches == 0) throw std::invalid_argument("estimate_data_variance: no patches requested");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < patches; ++i) {
    const auto p = data.draw(rng, patch_frames);
    acc += p.energy();
    count += p.size();
  }
  return acc / static_cast<double>(count);
}

}  // namespace dpse
