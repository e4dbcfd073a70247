#include <doctest.h>

#include <cmath>

#include "dpse/error.hpp"
#include "dpse/score_net.hpp"
#include "dpse/synthetic.hpp"

using namespace dpse;

namespace {

ScoreNetConfig tiny_config() {
  ScoreNetConfig c;
  c.hidden = 4;
  c.hidden_layers = 1;
  c.freq_features = 1;
  c.data_variance = 0.2;
  return c;
}

std::vector<float> pattern(std::size_t n, double scale) {
  std::vector<float> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<float>(scale * std::sin(1.7 * i + 0.2));
  return p;
}

ToyScoreNet with_params(const ScoreNetConfig& cfg, std::vector<float> p) {
  const std::size_t n = p.size();
  return ToyScoreNet(cfg, SdeSchedule{}, p, p,
                     {std::vector<float>(n, 0.0f), std::vector<float>(n, 0.0f)}, 0);
}

class NanSource final : public PatchSource {
 public:
  ComplexSpectrogram draw(Rng&, std::size_t frames) override {
    ComplexSpectrogram s(4, frames);
    s[0] = {NAN, 0.0};
    return s;
  }
};

}  // namespace

TEST_CASE("architecture size") {
  CHECK(tiny_config().input_dim() == 8);
  CHECK(tiny_config().parameter_count() == 46);
  const ScoreNetConfig def;
  CHECK(def.input_dim() == 12);
  CHECK(def.parameter_count() == (12 * 32 + 32) + (32 * 32 + 32) + (32 * 2 + 2));
  ToyScoreNet net(def, SdeSchedule{}, 1);
  CHECK(net.parameter_count() == def.parameter_count());
}

TEST_CASE("forward pass matches an independent reimplementation") {
  // Values from a numpy transcription of the architecture with the same
  // float32 weights, evaluated at t = 0.5.
  const auto net = with_params(tiny_config(), pattern(46, 0.3));
  ComplexSpectrogram s(3, 2);
  s(0, 0) = {0.3, 0.1};
  s(0, 1) = {-0.2, 0.4};
  s(1, 0) = {0.05, -0.3};
  s(1, 1) = {0.6, 0.0};
  s(2, 0) = {-0.1, -0.1};
  s(2, 1) = {0.2, 0.25};
  const Complex ref[3][2] = {
      {{-4.771158834664434, 2.0119549768234632}, {2.219352007766891, -4.3056568289480746}},
      {{-0.9710981634455951, 7.605896526944237}, {-9.575790924187539, 3.7834507178499144}},
      {{0.6267215073089232, 3.788860449225477}, {-4.731084356794716, -1.9842253640739411}},
  };
  const auto out = net.evaluate(s, 0.5);
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t t = 0; t < 2; ++t) {
      CHECK(out(f, t).real() == doctest::Approx(ref[f][t].real()).epsilon(1e-12));
      CHECK(out(f, t).imag() == doctest::Approx(ref[f][t].imag()).epsilon(1e-12));
    }
  }
  // Blocked inference and the taped training path agree.
  ToyScoreNet::Tape tape;
  CHECK(net.forward(net.parameters(), s, 0.5, &tape) == out);
}

TEST_CASE("evaluate is deterministic and rejects t = 0") {
  ToyScoreNet net(ScoreNetConfig{}, SdeSchedule{}, 9);
  Rng rng(1);
  const auto s = rng.complex_normal(256, 3);
  CHECK(net.evaluate(s, 0.3) == net.evaluate(s, 0.3));
  CHECK(net.evaluate(s, 0.3).all_finite());
  CHECK_THROWS(net.evaluate(s, 0.0));
  CHECK_THROWS(net.evaluate(s, 1.5));
}

TEST_CASE("dsm loss oracles") {
  const SdeSchedule sched;
  GaussianPatchSource src(toy_prior_profile(8));
  Rng rng(4);
  const auto batch = make_batch(src, 5, 3, sched, rng);
  REQUIRE(batch.size() == 5);
  for (double t : batch.t) {
    CHECK(t >= sched.t_min);
    CHECK(t <= 1.0);
  }

  const auto oracle = [&](std::size_t i, const ComplexSpectrogram&, double t) {
    auto z = batch.zeta[i];
    z *= -1.0 / std::sqrt(kernel_moments(t, sched).variance);
    return z;
  };
  CHECK(dsm_loss(oracle, batch, sched) == doctest::Approx(0.0).scale(1.0));

  double expected = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    expected += batch.zeta[i].energy() / kernel_moments(batch.t[i], sched).variance;
  }
  expected /= static_cast<double>(batch.size());
  const auto zero = [](std::size_t, const ComplexSpectrogram& s, double) {
    return ComplexSpectrogram(s.f_bins(), s.t_frames());
  };
  CHECK(dsm_loss(zero, batch, sched) == doctest::Approx(expected).epsilon(1e-12));

  ToyScoreNet net(tiny_config(), sched, 2);
  TrainBatch reversed;
  for (std::size_t i = batch.size(); i-- > 0;) {
    reversed.s0.push_back(batch.s0[i]);
    reversed.t.push_back(batch.t[i]);
    reversed.zeta.push_back(batch.zeta[i]);
  }
  CHECK(dsm_loss(net, batch, sched) == doctest::Approx(dsm_loss(net, reversed, sched)).epsilon(1e-12));

  TrainBatch early = batch;
  early.t[2] = 0.5 * sched.t_min;
  CHECK_THROWS(dsm_loss(zero, early, sched));
  CHECK_THROWS(dsm_loss(zero, TrainBatch{}, sched));
}

TEST_CASE("dsm gradient matches finite differences") {
  ScoreNetConfig cfg = tiny_config();
  cfg.hidden = 12;
  cfg.hidden_layers = 2;
  cfg.freq_features = 2;
  REQUIRE(cfg.parameter_count() <= 1000);
  ToyScoreNet net(cfg, SdeSchedule{}, 31);
  GaussianPatchSource src(toy_prior_profile(6));
  Rng rng(12);
  const auto batch = make_batch(src, 3, 2, net.schedule(), rng);

  std::vector<float> params(net.parameters().begin(), net.parameters().end());
  std::vector<double> grad(params.size());
  dsm_loss_and_gradient(net, params, batch, grad);

  std::vector<double> fd(params.size());
  std::vector<double> scratch(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const float orig = params[i];
    const float hi = orig + 1e-3f;
    const float lo = orig - 1e-3f;
    params[i] = hi;
    const double lp = dsm_loss_and_gradient(net, params, batch, scratch);
    params[i] = lo;
    const double lm = dsm_loss_and_gradient(net, params, batch, scratch);
    params[i] = orig;
    fd[i] = (lp - lm) / (static_cast<double>(hi) - static_cast<double>(lo));
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    num += (fd[i] - grad[i]) * (fd[i] - grad[i]);
    den += grad[i] * grad[i];
  }
  CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("EMA converges geometrically to frozen weights") {
  const auto cfg = tiny_config();
  const auto p = pattern(46, 0.3);
  auto e = pattern(46, -0.1);
  ToyScoreNet net(cfg, SdeSchedule{}, p, e, {std::vector<float>(46), std::vector<float>(46)}, 0);
  for (int n = 0; n < 500; ++n) net.update_ema();
  const double factor = std::pow(0.999, 500);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double expected = p[i] + factor * (static_cast<double>(e[i]) - p[i]);
    CHECK(net.ema_parameters()[i] == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("training") {
  const SdeSchedule sched;
  GaussianPatchSource src(toy_prior_profile(16));
  TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.patch_frames = 2;
  tc.steps_per_epoch = 60;
  tc.epochs = 2;
  tc.seed = 5;

  SUBCASE("zero epochs leave the parameters unchanged") {
    ToyScoreNet net(tiny_config(), sched, 3);
    const std::vector<float> before(net.parameters().begin(), net.parameters().end());
    TrainConfig none = tc;
    none.epochs = 0;
    const auto report = train(net, src, none);
    CHECK(report.steps == 0);
    CHECK(std::equal(before.begin(), before.end(), net.parameters().begin()));
  }

  SUBCASE("held-out loss decreases and runs are reproducible") {
    ToyScoreNet a(tiny_config(), sched, 3);
    ToyScoreNet b(tiny_config(), sched, 3);
    std::vector<double> seen;
    const auto ra = train(a, src, tc, [&](std::size_t, double loss) { seen.push_back(loss); });
    const auto rb = train(b, src, tc);
    CHECK(ra.steps == 120);
    CHECK(a.step() == 120);
    CHECK(seen.size() == 2);
    CHECK(ra.heldout_after < ra.heldout_before);
    CHECK(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
    CHECK(std::equal(a.ema_parameters().begin(), a.ema_parameters().end(), b.ema_parameters().begin()));
    CHECK(ra.epoch_loss == rb.epoch_loss);
  }

  SUBCASE("divergence is reported") {
    ToyScoreNet net(tiny_config(), sched, 3);
    NanSource nan;
    CHECK_THROWS_AS(train(net, nan, tc), NumericError);
  }

  SUBCASE("generators need an explicit epoch length") {
    ToyScoreNet net(tiny_config(), sched, 3);
    TrainConfig open = tc;
    open.steps_per_epoch = 0;
    CHECK_THROWS_AS(train(net, src, open), std::invalid_argument);
  }
}

TEST_CASE("spectrogram dataset patches") {
  Rng rng(2);
  std::vector<ComplexSpectrogram> items = {rng.complex_normal(5, 10), rng.complex_normal(5, 2)};
  SpectrogramDataset ds(items);
  CHECK(ds.size_hint() == 2);
  for (int i = 0; i < 20; ++i) {
    const auto p = ds.draw(rng, 4);
    CHECK(p.f_bins() == 5);
    CHECK((p.t_frames() == 4 || p.t_frames() == 2));
  }
  CHECK_THROWS(SpectrogramDataset({}));
  CHECK_THROWS(SpectrogramDataset({rng.complex_normal(5, 3), rng.complex_normal(4, 3)}));

  Rng est(6);
  GaussianPatchSource src(std::vector<double>(8, 0.25));
  CHECK(estimate_data_variance(src, 32, 50, est) == doctest::Approx(0.25).epsilon(0.05));
}
