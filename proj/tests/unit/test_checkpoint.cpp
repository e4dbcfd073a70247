#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dpse/checkpoint.hpp"
#include "dpse/error.hpp"
#include "dpse/synthetic.hpp"

using namespace dpse;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dpse_test_" + name)).string();
}

std::vector<char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ToyScoreNet trained_net() {
  SdeSchedule sched{1.5, 0.05, 0.5, 0.03};
  ScoreNetConfig cfg;
  cfg.hidden = 8;
  ToyScoreNet net(cfg, sched, 4);
  GaussianPatchSource src(toy_prior_profile(8));
  TrainConfig tc;
  tc.steps_per_epoch = 5;
  tc.patch_frames = 2;
  tc.learning_rate = 1e-3;
  train(net, src, tc);
  return net;
}

}  // namespace

TEST_CASE("round trip is bit-exact") {
  const auto net = trained_net();
  const auto path = temp_path("ckpt.bin");
  save_checkpoint(net, path);
  const auto back = load_checkpoint(path);

  CHECK(back.schedule() == net.schedule());
  CHECK(back.schedule().gamma == 1.5);
  CHECK(back.schedule().sigma_min == 0.05);
  CHECK(back.schedule().sigma_max == 0.5);
  CHECK(back.schedule().t_min == 0.03);
  CHECK(back.config() == net.config());
  CHECK(back.step() == net.step());
  CHECK(std::equal(net.parameters().begin(), net.parameters().end(), back.parameters().begin()));
  CHECK(std::equal(net.ema_parameters().begin(), net.ema_parameters().end(),
                   back.ema_parameters().begin()));
  CHECK(back.adam_state().m == net.adam_state().m);
  CHECK(back.adam_state().v == net.adam_state().v);

  Rng rng(3);
  const auto probe = rng.complex_normal(8, 4);
  CHECK(back.evaluate(probe, 0.42) == net.evaluate(probe, 0.42));

  // Saving the loaded model reproduces the file byte for byte.
  const auto again = temp_path("ckpt2.bin");
  save_checkpoint(back, again);
  CHECK(read_all(path) == read_all(again));
  std::filesystem::remove(path);
  std::filesystem::remove(again);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto net = trained_net();
  const auto path = temp_path("ckpt_bad.bin");
  save_checkpoint(net, path);
  const auto good = read_all(path);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  write_all(path, bad_magic);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);

  auto bad_version = good;
  bad_version[8] = 7;
  write_all(path, bad_version);
  try {
    load_checkpoint(path);
    FAIL("version mismatch accepted");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("version 7") != std::string::npos);
  }

  write_all(path, std::vector<char>(good.begin(), good.end() - 3));
  CHECK_THROWS_AS(load_checkpoint(path), IoError);

  auto trailing = good;
  trailing.push_back(0);
  write_all(path, trailing);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);

  CHECK_THROWS_AS(load_checkpoint(temp_path("missing.bin")), IoError);
  std::filesystem::remove(path);
}
