#include "dpse_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dpse/checkpoint.hpp"
#include "dpse/em.hpp"
#include "dpse/error.hpp"
#include "dpse/metrics.hpp"
#include "dpse/sampler.hpp"
#include "dpse/score_net.hpp"
#include "dpse/sde.hpp"
#include "dpse/signal.hpp"
#include "dpse/synthetic.hpp"

namespace fs = std::filesystem;

namespace dpse::cli {
namespace {

// Raised for problems with otherwise well-formed arguments (exit code 2).
class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleFlags {
  SdeSchedule sched;
  std::vector<CLI::Option*> options;

  void add(CLI::App* app) {
    auto* g = app->add_option_group("SDE schedule");
    options = {
        g->add_option("--gamma", sched.gamma, "Drift stiffness")->capture_default_str(),
        g->add_option("--sigma-min", sched.sigma_min, "Minimum noise scale")->capture_default_str(),
        g->add_option("--sigma-max", sched.sigma_max, "Maximum noise scale")->capture_default_str(),
        g->add_option("--t-min", sched.t_min, "Smallest diffusion time")->capture_default_str(),
    };
  }

  bool given() const {
    return std::any_of(options.begin(), options.end(), [](auto* o) { return o->count() > 0; });
  }
};

void add_stft(CLI::App* app, StftConfig& cfg) {
  auto* g = app->add_option_group("STFT");
  g->add_option("--window-len", cfg.window_len, "Hann window length in samples")->capture_default_str();
  g->add_option("--hop", cfg.hop, "Hop size in samples")->capture_default_str();
  g->add_option("--compress-alpha", cfg.compress_alpha, "Magnitude compression exponent")
      ->capture_default_str();
  g->add_option("--compress-beta", cfg.compress_beta, "Magnitude compression scale")
      ->capture_default_str();
}

struct SamplerFlags {
  SamplerConfig cfg;
  bool no_corrector = false;
  bool no_final_denoise = false;
  std::string guidance = "proximal";

  void add(CLI::App* app, bool with_guidance) {
    auto* g = app->add_option_group("Sampler");
    g->add_option("--steps", cfg.n_steps, "Reverse diffusion steps N")->capture_default_str();
    g->add_option("--corrector-steps", cfg.corrector_steps, "Langevin corrector steps per level")
        ->capture_default_str();
    g->add_flag("--no-corrector", no_corrector, "Disable the Langevin corrector");
    g->add_flag("--no-final-denoise", no_final_denoise,
                "Return the last sampler state instead of its denoised estimate");
    if (with_guidance) {
      g->add_option("--posterior-every", cfg.posterior_every, "Guidance update every l steps")
          ->capture_default_str();
      g->add_option("--lambda", cfg.guidance_weight, "Guidance weight (0 disables guidance)")
          ->capture_default_str();
      g->add_option("--guidance", guidance, "Guidance update rule")
          ->check(CLI::IsMember({"proximal", "explicit"}))
          ->capture_default_str();
    }
  }

  SamplerConfig resolve() const {
    SamplerConfig out = cfg;
    out.corrector_enabled = !no_corrector;
    out.final_denoise = !no_final_denoise;
    out.guidance_update = guidance == "explicit" ? GuidanceUpdate::kExplicit : GuidanceUpdate::kProximal;
    return out;
  }
};

void add_em(CLI::App* app, EnhancementConfig& cfg) {
  auto* g = app->add_option_group("EM");
  g->add_option("--em-iters", cfg.em_iters, "EM iterations K")->capture_default_str();
  g->add_option("--rank", cfg.nmf_rank, "NMF noise rank r")->capture_default_str();
  g->add_option("--batch", cfg.batch, "Posterior samples per EM iteration b")->capture_default_str();
  g->add_option("--nmf-updates", cfg.nmf_inner_updates, "Multiplicative updates per M-step")
      ->capture_default_str();
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void ensure_writable(const std::string& path) {
  const bool existed = fs::exists(path);
  std::ofstream probe(path, std::ios::app);
  if (!probe) throw IoError("cannot open '" + path + "' for writing");
  probe.close();
  if (!existed) fs::remove(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<std::string> wav_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (e.is_regular_file() && ext == ".wav") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Loads the checkpoint and reconciles its schedule with explicit flags.
ToyScoreNet load_model(const std::string& path, const ScheduleFlags& flags, bool force,
                       std::ostream& out) {
  auto net = load_checkpoint(path);
  if (flags.given() && !(flags.sched == net.schedule())) {
    if (!force) {
      throw ValidationFailure("SDE schedule flags do not match checkpoint '" + path +
                              "'; pass --force to use the checkpoint schedule");
    }
    out << "warning=schedule flags ignored; using the checkpoint schedule\n";
  }
  return net;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string data_dir;
  std::string synthetic;
  std::string output;
  std::string resume;
  TrainConfig train;
  ScoreNetConfig net;
  std::string lr_schedule = "constant";
  std::uint64_t init_seed = 1;
  std::size_t synthetic_steps = 1000;
  ScheduleFlags schedule;
  StftConfig stft;
};

int cmd_train(TrainArgs& a, std::ostream& out) {
  a.train.lr_schedule = a.lr_schedule == "cosine" ? LrSchedule::kCosine : LrSchedule::kConstant;
  a.schedule.sched.validate();
  a.stft.validate();

  std::unique_ptr<PatchSource> source;
  if (!a.synthetic.empty()) {
    source = std::make_unique<GaussianPatchSource>(toy_prior_profile(a.stft.f_bins()));
    if (a.train.steps_per_epoch == 0) a.train.steps_per_epoch = a.synthetic_steps;
  } else {
    std::vector<ComplexSpectrogram> items;
    for (const auto& f : wav_files(a.data_dir)) items.push_back(stft(load_wav(f), a.stft));
    if (items.empty()) throw ValidationFailure("dataset '" + a.data_dir + "' contains no WAV files");
    source = std::make_unique<SpectrogramDataset>(std::move(items));
  }
  a.train.validate();
  ensure_writable(a.output);

  std::optional<ToyScoreNet> net;
  if (!a.resume.empty()) {
    net.emplace(load_model(a.resume, a.schedule, false, out));
  } else {
    if (a.net.data_variance <= 0.0) {
      Rng rng(split_seed(a.train.seed, 0xDA7A));
      a.net.data_variance = estimate_data_variance(*source, std::min<std::size_t>(a.train.patch_frames, 64),
                                                   64, rng);
    }
    a.net.validate();
    net.emplace(a.net, a.schedule.sched, a.init_seed);
  }

  out << "command=train\nseed=" << a.train.seed << "\nparameters=" << net->parameter_count()
      << "\nstart_step=" << net->step() << "\ndata_variance=" << net->config().data_variance << "\n";
  const auto report = train(*net, *source, a.train, [&](std::size_t epoch, double loss) {
    out << "epoch=" << epoch + 1 << " loss=" << fixed(loss) << "\n" << std::flush;
  });
  save_checkpoint(*net, a.output);
  out << "heldout_before=" << fixed(report.heldout_before) << "\nheldout_after="
      << fixed(report.heldout_after) << "\nsteps=" << net->step() << "\ncheckpoint=" << a.output << "\n";
  return kOk;
}

// ------------------------------------------------------------------ enhance

struct EnhanceArgs {
  std::string input;
  std::string checkpoint;
  std::string output;
  std::string clean;
  std::string report;
  std::string dump_spec;
  bool force = false;
  EnhancementConfig em;
  SamplerFlags sampler;
  ScheduleFlags schedule;
  StftConfig stft;
};

int cmd_enhance(EnhanceArgs& a, std::ostream& out) {
  a.em.sampler = a.sampler.resolve();
  a.em.validate();
  a.stft.validate();
  const auto net = load_model(a.checkpoint, a.schedule, a.force, out);
  const auto noisy = load_wav(a.input);
  std::optional<Waveform> clean;
  if (!a.clean.empty()) clean = load_wav(a.clean);
  ensure_writable(a.output);

  out << "command=enhance\nseed=" << a.em.seed << "\ninput=" << a.input << "\n";
  EnhancementResult details;
  const auto enhanced = enhance_waveform(noisy, net, net.schedule(), a.stft, a.em, &details);
  for (std::size_t k = 0; k < details.trace.size(); ++k) {
    const auto& tr = details.trace[k];
    out << "em_iter=" << k + 1 << " objective_before=" << fixed(tr.objective_before)
        << " objective_after=" << fixed(tr.objective_after)
        << " mean_noise_variance=" << fixed(tr.mean_noise_variance, 9) << "\n";
  }
  save_wav(a.output, enhanced);
  if (!a.dump_spec.empty()) write_grid(a.dump_spec, details.s_hat);
  out << "output=" << a.output << "\n";
  if (clean) {
    auto r = evaluate_pair(noisy, enhanced, *clean);
    r.name = a.input;
    out << format_report(r);
    if (!a.report.empty()) {
      write_text(a.report, reports_to_json({r}, {{"seed", std::to_string(a.em.seed)},
                                                 {"checkpoint", a.checkpoint}}));
    }
  }
  return kOk;
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string checkpoint;
  std::string output;
  std::string dump_spec;
  double duration = 1.0;
  std::uint64_t seed = 0;
  bool force = false;
  SamplerFlags sampler;
  ScheduleFlags schedule;
  StftConfig stft;
};

int cmd_sample(SampleArgs& a, std::ostream& out) {
  const auto cfg = a.sampler.resolve();
  cfg.validate();
  a.stft.validate();
  if (!(a.duration > 0.0)) throw std::invalid_argument("--duration must be positive");
  if (a.output.empty() && a.dump_spec.empty()) {
    throw std::invalid_argument("sample: give --output and/or --dump-spec");
  }
  const auto net = load_model(a.checkpoint, a.schedule, a.force, out);
  if (!a.output.empty()) ensure_writable(a.output);

  const auto n = static_cast<std::size_t>(std::lround(a.duration * 16000.0));
  const auto frames = a.stft.frames_for(n);
  out << "command=sample\nseed=" << a.seed << "\nframes=" << frames << "\n";
  Rng rng(a.seed);
  const auto spec = unconditional_sample(a.stft.f_bins(), frames, net, net.schedule(), cfg, rng);
  if (!a.dump_spec.empty()) {
    write_grid(a.dump_spec, spec);
    out << "spectrogram=" << a.dump_spec << "\n";
  }
  if (!a.output.empty()) {
    save_wav(a.output, istft(spec, a.stft, n));
    out << "output=" << a.output << "\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ validate-sde

struct ValidateArgs {
  ScheduleFlags schedule;
  std::string leading = "sigma-min";
  std::size_t steps = 10000;
  double tolerance = 1e-6;
};

int cmd_validate_sde(ValidateArgs& a, std::ostream& out) {
  a.schedule.sched.leading =
      a.leading == "sigma-max" ? DiffusionLeading::kSigmaMax : DiffusionLeading::kSigmaMin;
  a.schedule.sched.validate();
  const auto r = check_variance_ode(a.schedule.sched, a.steps);
  const bool pass = r.max_rel_error < a.tolerance;
  out << "command=validate-sde\nmax_rel_error=" << std::scientific << std::setprecision(6)
      << r.max_rel_error << std::defaultfloat << "\nworst_t=" << fixed(r.worst_t)
      << "\nsteps=" << r.steps << "\nresult=" << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kOk : kValidation;
}

// ------------------------------------------------------------------ benchmark

struct BenchmarkArgs {
  std::string checkpoint;
  std::string clean_dir;
  std::string noise_dir;
  bool synthetic = false;
  std::size_t utterances = 20;
  double duration = 1.0;
  std::vector<double> snrs = {-5.0, 0.0, 5.0};
  std::size_t jobs = 1;
  std::string report;
  bool force = false;
  EnhancementConfig em;
  SamplerFlags sampler;
  ScheduleFlags schedule;
  StftConfig stft;
};

struct Utterance {
  std::string name;
  Waveform clean;
  Waveform noise;
};

int cmd_benchmark(BenchmarkArgs& a, std::ostream& out) {
  a.em.sampler = a.sampler.resolve();
  a.em.jobs = 1;
  a.em.validate();
  a.stft.validate();
  if (a.jobs == 0) throw std::invalid_argument("--jobs must be >= 1");
  if (a.synthetic == !a.clean_dir.empty()) {
    throw std::invalid_argument("benchmark: give either --synthetic or --clean-dir/--noise-dir");
  }
  const auto net = load_model(a.checkpoint, a.schedule, a.force, out);
  const auto& sched = net.schedule();

  std::vector<Utterance> utts;
  if (a.synthetic) {
    const auto n = static_cast<std::size_t>(std::lround(a.duration * 16000.0));
    const auto frames = a.stft.frames_for(n);
    for (std::size_t u = 0; u < a.utterances; ++u) {
      Rng rng(split_seed(split_seed(a.em.seed, 0xC1EA), u));
      auto clean = istft(unconditional_sample(a.stft.f_bins(), frames, net, sched, a.em.sampler, rng),
                         a.stft, n);
      const auto noise_model = synthetic_noise_model(a.stft.f_bins(), frames, a.em.nmf_rank,
                                                     split_seed(split_seed(a.em.seed, 0x0015E), u));
      auto noise = istft(sample_noise(noise_model, rng), a.stft, n);
      utts.push_back({"synthetic_" + std::to_string(u), std::move(clean), std::move(noise)});
    }
  } else {
    const auto clean_files = wav_files(a.clean_dir);
    const auto noise_files = wav_files(a.noise_dir);
    if (clean_files.empty() || noise_files.empty()) {
      throw ValidationFailure("benchmark: clean and noise directories must contain WAV files");
    }
    for (std::size_t i = 0; i < clean_files.size(); ++i) {
      utts.push_back({fs::path(clean_files[i]).filename().string(), load_wav(clean_files[i]),
                      load_wav(noise_files[i % noise_files.size()])});
    }
  }
  if (!a.report.empty()) ensure_writable(a.report);

  struct Job {
    std::size_t utt;
    double snr;
  };
  std::vector<Job> jobs;
  for (double snr : a.snrs) {
    for (std::size_t u = 0; u < utts.size(); ++u) jobs.push_back({u, snr});
  }
  out << "command=benchmark\nseed=" << a.em.seed << "\nutterances=" << utts.size()
      << "\njobs=" << a.jobs << "\n" << std::flush;

  std::vector<MetricReport> reports(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const auto& utt = utts[jobs[j].utt];
        const std::uint64_t key = split_seed(a.em.seed, j);
        const auto mix = mix_at_snr(utt.clean, utt.noise, jobs[j].snr, key).mixture;
        EnhancementConfig cfg = a.em;
        cfg.seed = split_seed(key, 1);
        auto r = evaluate_pair(mix, enhance_waveform(mix, net, sched, a.stft, cfg), utt.clean);
        r.name = utt.name + "@" + fixed(jobs[j].snr, 1) + "dB";
        reports[j] = std::move(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(a.jobs, jobs.size()); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  for (const auto& r : reports) out << format_report(r);
  std::vector<std::pair<std::string, std::string>> meta = {{"seed", std::to_string(a.em.seed)},
                                                           {"checkpoint", a.checkpoint}};
  for (double snr : a.snrs) {
    std::vector<MetricReport> subset;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].snr == snr) subset.push_back(reports[j]);
    }
    out << "snr=" << fixed(snr, 1) << "\n" << format_aggregate(aggregate(subset));
  }
  out << "snr=all\n" << format_aggregate(aggregate(reports));
  if (!a.report.empty()) write_text(a.report, reports_to_json(reports, meta));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised speech enhancement with a diffusion prior and NMF noise model", "dpse"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value file; keys of a subcommand go under a [subcommand] section; "
                 "command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train the toy score network");
  auto* source = train->add_option_group("data source");
  source->add_option("--data", train_args.data_dir, "Directory of clean 16 kHz WAV files");
  source->add_option("--synthetic", train_args.synthetic, "Built-in generator")
      ->check(CLI::IsMember({"gaussian"}));
  source->require_option(1);
  train->add_option("-o,--output", train_args.output, "Checkpoint to write")->required();
  train->add_option("--resume", train_args.resume, "Continue from this checkpoint");
  train->add_option("--lr", train_args.train.learning_rate, "Adam learning rate")->capture_default_str();
  train->add_option("--batch-size", train_args.train.batch_size, "Patches per step")->capture_default_str();
  train->add_option("--epochs", train_args.train.epochs, "Training epochs")->capture_default_str();
  train->add_option("--steps-per-epoch", train_args.train.steps_per_epoch,
                    "Steps per epoch (0: one pass over --data)")
      ->capture_default_str();
  train->add_option("--synthetic-steps", train_args.synthetic_steps,
                    "Steps per epoch for --synthetic when --steps-per-epoch is 0")
      ->capture_default_str();
  train->add_option("--patch-frames", train_args.train.patch_frames, "Frames per training patch")
      ->capture_default_str();
  train->add_option("--lr-schedule", train_args.lr_schedule, "Learning-rate schedule")
      ->check(CLI::IsMember({"constant", "cosine"}))
      ->capture_default_str();
  train->add_option("--hidden", train_args.net.hidden, "Hidden units per layer")->capture_default_str();
  train->add_option("--layers", train_args.net.hidden_layers, "Hidden layers")->capture_default_str();
  train->add_option("--freq-features", train_args.net.freq_features, "Frequency embedding pairs")
      ->capture_default_str();
  train->add_option("--data-variance", train_args.net.data_variance,
                    "Clean-data variance (<= 0: estimate from the data)")
      ->default_str("0");
  train_args.net.data_variance = 0.0;
  train->add_option("--ema-decay", train_args.net.ema_decay, "EMA decay of the weights")
      ->capture_default_str();
  train->add_option("--seed", train_args.train.seed, "Training seed")->capture_default_str();
  train->add_option("--init-seed", train_args.init_seed, "Weight initialisation seed")
      ->capture_default_str();
  train_args.schedule.add(train);
  add_stft(train, train_args.stft);

  EnhanceArgs enhance_args;
  auto* enhance = app.add_subcommand("enhance", "Enhance a noisy WAV file");
  enhance->add_option("-i,--input", enhance_args.input, "Noisy 16 kHz WAV")->required();
  enhance->add_option("-c,--checkpoint", enhance_args.checkpoint, "Score network checkpoint")->required();
  enhance->add_option("-o,--output", enhance_args.output, "Enhanced WAV to write")->required();
  enhance->add_option("--clean", enhance_args.clean, "Clean reference; prints SI-SDR metrics");
  enhance->add_option("--report", enhance_args.report, "JSON metric report (needs --clean)")
      ->needs("--clean");
  enhance->add_option("--dump-spec", enhance_args.dump_spec, "Write the enhanced spectrogram grid");
  enhance->add_option("--seed", enhance_args.em.seed, "Master seed")->capture_default_str();
  enhance->add_option("--jobs", enhance_args.em.jobs, "Threads for posterior chains")->capture_default_str();
  enhance->add_flag("--force", enhance_args.force, "Use the checkpoint schedule if flags disagree");
  add_em(enhance, enhance_args.em);
  enhance_args.sampler.add(enhance, true);
  enhance_args.schedule.add(enhance);
  add_stft(enhance, enhance_args.stft);

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Draw clean speech from the prior");
  sample->add_option("-c,--checkpoint", sample_args.checkpoint, "Score network checkpoint")->required();
  sample->add_option("-o,--output", sample_args.output, "WAV to write");
  sample->add_option("--dump-spec", sample_args.dump_spec, "Write the sampled spectrogram grid");
  sample->add_option("--duration", sample_args.duration, "Seconds of audio")->capture_default_str();
  sample->add_option("--seed", sample_args.seed, "Sampling seed")->capture_default_str();
  sample->add_flag("--force", sample_args.force, "Use the checkpoint schedule if flags disagree");
  sample_args.sampler.add(sample, false);
  sample_args.schedule.add(sample);
  add_stft(sample, sample_args.stft);

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate-sde", "Check the closed-form variance against its ODE");
  validate->add_option("--leading", validate_args.leading, "Leading coefficient of g(t)")
      ->check(CLI::IsMember({"sigma-min", "sigma-max"}))
      ->capture_default_str();
  validate->add_option("--ode-steps", validate_args.steps, "RK4 steps over [0, 1]")->capture_default_str();
  validate->add_option("--tolerance", validate_args.tolerance, "Maximum relative error")
      ->capture_default_str();
  validate_args.schedule.add(validate);

  BenchmarkArgs bench_args;
  auto* bench = app.add_subcommand("benchmark", "Mix, enhance and score a set of utterances");
  bench->add_option("-c,--checkpoint", bench_args.checkpoint, "Score network checkpoint")->required();
  bench->add_option("--clean-dir", bench_args.clean_dir, "Directory of clean WAV files");
  bench->add_option("--noise-dir", bench_args.noise_dir, "Directory of noise WAV files (cycled)")
      ->needs("--clean-dir");
  bench->get_option("--clean-dir")->needs("--noise-dir");
  bench->add_flag("--synthetic", bench_args.synthetic,
                  "Clean speech sampled from the prior, rank-r synthetic NMF noise");
  bench->add_option("--utterances", bench_args.utterances, "Synthetic utterances")->capture_default_str();
  bench->add_option("--duration", bench_args.duration, "Synthetic utterance length in seconds")
      ->capture_default_str();
  bench->add_option("--snr", bench_args.snrs, "Mixing SNRs in dB")
      ->delimiter(',')
      ->allow_extra_args(false)
      ->default_str("-5,0,5");
  bench->add_option("--jobs", bench_args.jobs, "Utterances enhanced concurrently")->capture_default_str();
  bench->add_option("--report", bench_args.report, "JSON metric report");
  bench->add_option("--seed", bench_args.em.seed, "Master seed")->capture_default_str();
  bench->add_flag("--force", bench_args.force, "Use the checkpoint schedule if flags disagree");
  add_em(bench, bench_args.em);
  bench_args.sampler.add(bench, true);
  bench_args.schedule.add(bench);
  add_stft(bench, bench_args.stft);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    try {
      if (train->parsed()) return cmd_train(train_args, out);
      if (enhance->parsed()) return cmd_enhance(enhance_args, out);
      if (sample->parsed()) return cmd_sample(sample_args, out);
      if (validate->parsed()) return cmd_validate_sde(validate_args, out);
      return cmd_benchmark(bench_args, out);
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << "\n";
      return kUsage;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace dpse::cli
