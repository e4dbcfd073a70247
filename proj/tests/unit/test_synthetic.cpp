#include <doctest.h>

#include <cmath>

#include "dpse/synthetic.hpp"

using namespace dpse;

TEST_CASE("toy prior profile") {
  const auto p = toy_prior_profile(256);
  REQUIRE(p.size() == 256);
  CHECK(p[0] == doctest::Approx(0.301));
  CHECK(p[20] == doctest::Approx(0.3 * std::exp(-1.0) + 0.001));
  CHECK(p[255] == doctest::Approx(0.001).epsilon(1e-3));
  const auto prior = make_profile_prior(p, 3, SdeSchedule{});
  CHECK(prior.var0.size() == 768);
  CHECK(prior.var0[3] == p[1]);
}

TEST_CASE("gaussian patches follow the profile") {
  GaussianPatchSource src({0.5, 0.01});
  Rng rng(1);
  const auto s = src.draw(rng, 20000);
  double e0 = 0.0;
  double e1 = 0.0;
  for (std::size_t t = 0; t < 20000; ++t) {
    e0 += std::norm(s(0, t));
    e1 += std::norm(s(1, t));
  }
  CHECK(e0 / 20000 == doctest::Approx(0.5).epsilon(0.03));
  CHECK(e1 / 20000 == doctest::Approx(0.01).epsilon(0.03));
}

TEST_CASE("synthetic noise model") {
  const auto m = synthetic_noise_model(256, 50, 4, 3);
  CHECK(m.rank() == 4);
  for (Eigen::Index k = 0; k < 4; ++k) {
    Eigen::Index peak = 0;
    m.W.col(k).maxCoeff(&peak);
    CHECK(peak == std::lround((k + 1) * 256.0 / 5.0));
  }
  CHECK(m.W.minCoeff() >= 0.01);
  CHECK(m.H.minCoeff() > 0.0);
  CHECK(synthetic_noise_model(256, 50, 4, 3).H == m.H);

  Rng rng(2);
  const auto big = synthetic_noise_model(8, 4000, 2, 1);
  const auto n = sample_noise(big, rng);
  const Eigen::MatrixXd V = big.variance();
  double ratio = 0.0;
  for (std::size_t f = 0; f < 8; ++f) {
    for (std::size_t t = 0; t < 4000; ++t) ratio += std::norm(n(f, t)) / V(f, t);
  }
  CHECK(ratio / 32000 == doctest::Approx(1.0).epsilon(0.03));
}
