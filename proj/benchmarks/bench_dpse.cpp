#include <benchmark/benchmark.h>

#include "dpse/metrics.hpp"
#include "dpse/nmf.hpp"
#include "dpse/sampler.hpp"
#include "dpse/score_net.hpp"
#include "dpse/signal.hpp"
#include "dpse/synthetic.hpp"

using namespace dpse;

namespace {

Waveform noise_waveform(std::size_t n) {
  Waveform w;
  Rng rng(1);
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(0.1 * rng.normal());
  return w;
}

void BM_Stft(benchmark::State& state) {
  const auto w = noise_waveform(16000);
  const StftConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(stft(w, cfg));
}
BENCHMARK(BM_Stft)->Unit(benchmark::kMicrosecond);

void BM_Istft(benchmark::State& state) {
  const StftConfig cfg;
  const auto spec = stft(noise_waveform(16000), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(istft(spec, cfg, 16000));
}
BENCHMARK(BM_Istft)->Unit(benchmark::kMicrosecond);

// One score evaluation on a 1 s spectrogram (256 x 126 bins).
void BM_ScoreNetEvaluate(benchmark::State& state) {
  const SdeSchedule sched;
  ScoreNetConfig cfg;
  cfg.hidden = static_cast<std::size_t>(state.range(0));
  const ToyScoreNet net(cfg, sched, 1);
  Rng rng(2);
  const auto s = rng.complex_normal(256, 126);
  for (auto _ : state) benchmark::DoNotOptimize(net.evaluate(s, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_ScoreNetEvaluate)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const SdeSchedule sched;
  ToyScoreNet net(ScoreNetConfig{}, sched, 1);
  GaussianPatchSource src(toy_prior_profile(256));
  Rng rng(3);
  const auto batch = make_batch(src, 16, 1, sched, rng);
  std::vector<double> grad(net.parameter_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(dsm_loss_and_gradient(net, net.parameters(), batch, grad));
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMicrosecond);

void BM_PosteriorSample(benchmark::State& state) {
  const SdeSchedule sched;
  const auto prior = make_profile_prior(toy_prior_profile(256), 126, sched);
  const GaussianPriorScore model(prior);
  Rng rng(4);
  const GuidanceContext ctx{rng.complex_normal(256, 126), std::vector<double>(256 * 126, 0.1)};
  const SamplerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(posterior_sample(ctx, model, sched, cfg, rng));
}
BENCHMARK(BM_PosteriorSample)->Unit(benchmark::kMillisecond);

void BM_NmfUpdate(benchmark::State& state) {
  const auto truth = synthetic_noise_model(256, 126, 4, 5);
  const Eigen::MatrixXd P = truth.variance();
  auto params = init_nmf(256, 126, 4, P.mean(), 6);
  for (auto _ : state) {
    params = update_step(P, params);
    benchmark::DoNotOptimize(params.W.data());
  }
}
BENCHMARK(BM_NmfUpdate)->Unit(benchmark::kMicrosecond);

void BM_SiSdr(benchmark::State& state) {
  const auto r = noise_waveform(16000);
  auto e = r;
  for (auto& v : e.samples) v *= 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(si_sdr(e, r));
}
BENCHMARK(BM_SiSdr)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
