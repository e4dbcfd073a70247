#include "dpse/em.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "dpse/error.hpp"

namespace dpse {

void EnhancementConfig::validate() const {
  sampler.validate();
  if (em_iters == 0) throw std::invalid_argument("em_iters must be >= 1");
  if (nmf_rank == 0) throw std::invalid_argument("nmf_rank must be >= 1");
  if (batch == 0) throw std::invalid_argument("batch must be >= 1");
  if (nmf_inner_updates == 0) throw std::invalid_argument("nmf_inner_updates must be >= 1");
  if (jobs == 0) throw std::invalid_argument("jobs must be >= 1");
}

std::uint64_t chain_seed(std::uint64_t master, std::size_t iteration, std::size_t chain) {
  return split_seed(split_seed(master, iteration), chain);
}

namespace {

constexpr std::uint64_t kNmfInitStream = 0x6e6d66u;

std::vector<ComplexSpectrogram> run_chains(const GuidanceContext& ctx, const ScoreModel& model,
                                           const SdeSchedule& sched, const EnhancementConfig& cfg,
                                           std::size_t iteration) {
  std::vector<ComplexSpectrogram> out(cfg.batch);
  std::vector<std::exception_ptr> errors(cfg.batch);
  auto run = [&](std::size_t j) {
    try {
      Rng rng(chain_seed(cfg.seed, iteration, j));
      out[j] = posterior_sample(ctx, model, sched, cfg.sampler, rng);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };

  const std::size_t workers = std::min(cfg.jobs, cfg.batch);
  if (workers <= 1) {
    for (std::size_t j = 0; j < cfg.batch; ++j) run(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < cfg.batch; j = next++) run(j);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

EnhancementResult enhance_spectrogram(const ComplexSpectrogram& x, const ScoreModel& model,
                                      const SdeSchedule& sched, const EnhancementConfig& cfg,
                                      const std::optional<NmfParams>& initial_noise) {
  cfg.validate();
  sched.validate();
  if (x.empty()) throw std::invalid_argument("cannot enhance an empty spectrogram");
  if (!x.all_finite()) throw std::invalid_argument("mixture spectrogram has non-finite entries");
  if (!(model.schedule() == sched)) {
    throw std::invalid_argument("score model was built for a different SDE schedule");
  }

  EnhancementResult result;
  if (initial_noise) {
    initial_noise->validate();
    if (static_cast<std::size_t>(initial_noise->W.rows()) != x.f_bins() ||
        static_cast<std::size_t>(initial_noise->H.cols()) != x.t_frames()) {
      throw std::invalid_argument("initial noise model does not match the mixture shape");
    }
    result.nmf = *initial_noise;
  } else {
    const double power = std::max(x.energy() / static_cast<double>(x.size()), kNmfFloor);
    result.nmf = init_nmf(x.f_bins(), x.t_frames(), cfg.nmf_rank, power,
                          split_seed(cfg.seed, kNmfInitStream));
  }

  GuidanceContext ctx{x, {}};
  for (std::size_t k = 0; k < cfg.em_iters; ++k) {
    try {
      ctx.v_phi = result.nmf.variance_flat();
      const auto chains = run_chains(ctx, model, sched, cfg, k);

      ComplexSpectrogram mean(x.f_bins(), x.t_frames());
      for (const auto& c : chains) mean += c;
      mean *= 1.0 / static_cast<double>(chains.size());
      result.s_hat = std::move(mean);

      EmIterationTrace tr;
      const Eigen::MatrixXd P = residual_power(x, result.s_hat);
      tr.mean_residual_power = P.mean();
      tr.objective_before = is_objective(P, result.nmf);
      if (cfg.update_noise) {
        for (std::size_t u = 0; u < cfg.nmf_inner_updates; ++u) {
          result.nmf = update_step(P, result.nmf);
        }
      }
      tr.objective_after = is_objective(P, result.nmf);
      tr.mean_noise_variance = result.nmf.variance().mean();
      result.trace.push_back(tr);
    } catch (const NumericError& e) {
      throw NumericError("EM iteration " + std::to_string(k + 1) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("EM iteration " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return result;
}

Waveform enhance_waveform(const Waveform& noisy, const ScoreModel& model,
                          const SdeSchedule& sched, const StftConfig& stft_cfg,
                          const EnhancementConfig& cfg, EnhancementResult* details) {
  noisy.validate();
  if (noisy.sample_rate != 16000) {
    throw std::invalid_argument("enhancement expects 16 kHz input, got " +
                                std::to_string(noisy.sample_rate) + " Hz");
  }
  const auto x = stft(noisy, stft_cfg);
  auto result = enhance_spectrogram(x, model, sched, cfg);
  auto out = istft(result.s_hat, stft_cfg, noisy.size(), noisy.sample_rate);
  if (details) *details = std::move(result);
  return out;
}

}  // namespace dpse
