#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scnet/bandplan.hpp"
#include "scnet/checkpoint.hpp"
#include "scnet/config_io.hpp"
#include "scnet/errors.hpp"
#include "scnet/fixtures.hpp"
#include "scnet/infer.hpp"
#include "scnet/metrics.hpp"
#include "scnet/model.hpp"
#include "scnet/rng.hpp"
#include "scnet/train.hpp"
#include "scnet/wav.hpp"

namespace fs = std::filesystem;
using namespace scnet;

namespace {

BandSplitSpec spec_from(const std::vector<double>& proportions,
                        const std::vector<int>& strides) {
  BandSplitSpec spec;
  if (!proportions.empty()) {
    if (proportions.size() != 3)
      throw ConfigError("proportions must hold exactly 3 values");
    std::copy(proportions.begin(), proportions.end(), spec.proportions.begin());
  }
  if (!strides.empty()) {
    if (strides.size() != 3) throw ConfigError("strides must hold exactly 3 values");
    std::copy(strides.begin(), strides.end(), spec.strides.begin());
  }
  return spec;
}

int run_plan_bands(std::int64_t freq_bins, const std::vector<double>& proportions,
                   const std::vector<int>& strides, int blocks) {
  BandSplitSpec spec = spec_from(proportions, strides);
  spec.validate();
  BandPlan p = plan(freq_bins, spec);

  std::printf("input_bins %lld\n", static_cast<long long>(p.input_width));
  std::printf("band start width right_pad out_width stride\n");
  const char* names[3] = {"low", "mid", "high"};
  for (int b = 0; b < 3; ++b) {
    const BandExtent& e = p.bands[static_cast<std::size_t>(b)];
    std::printf("%s %lld %lld %lld %lld %d\n", names[b],
                static_cast<long long>(e.start), static_cast<long long>(e.width),
                static_cast<long long>(e.right_pad),
                static_cast<long long>(e.out_width),
                spec.strides[static_cast<std::size_t>(b)]);
  }
  std::printf("total_out %lld\n", static_cast<long long>(p.total_out_width));
  std::printf("retention %.6f\n", p.retention);

  CompressionReport rep = cascade(freq_bins, spec, blocks);
  std::printf("gcr %.6f\n", rep.gcr);
  std::printf("cascade");
  for (std::size_t i = 0; i < rep.cascade.size(); ++i)
    std::printf("%s%lld", i == 0 ? " " : " -> ",
                static_cast<long long>(rep.cascade[i]));
  std::printf("\n");
  return 0;
}

int run_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_path, std::uint64_t seed, bool seed_given) {
  AppConfig cfg = load_app_config(config_path);
  if (seed_given) cfg.train.seed = seed;

  std::vector<std::string> track_dirs = list_tracks(data_dir);
  if (track_dirs.empty())
    throw IoError(data_dir + " holds no track directories with a mixture.wav");
  std::vector<StemSet> tracks;
  for (const std::string& dir : track_dirs)
    tracks.push_back(read_stem_set(dir, cfg.model.sources));
  std::printf("tracks %zu\n", tracks.size());

  Model model(cfg.model);
  RngState rng(cfg.train.seed);
  model.init(rng);
  std::printf("params %lld\n",
              static_cast<long long>(model.params().total_params()));

  TrainResult result = fit_toy(model, tracks, cfg.train);
  for (std::size_t i = 0; i < result.losses.size(); ++i)
    std::printf("step %zu loss %.9f\n", i + 1, result.losses[i]);

  save_checkpoint(out_path, model, result.adam, cfg.train.seed);
  std::printf("checkpoint %s\n", out_path.c_str());
  return 0;
}

int run_separate(const std::string& ckpt_path, const std::string& input_path,
                 const std::string& out_dir) {
  LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
  AudioBuffer audio = read_wav(input_path);
  std::printf("input %s samples %lld rate %d\n", input_path.c_str(),
              static_cast<long long>(audio.length()), audio.sample_rate);

  std::vector<AudioBuffer> stems = separate_long(ckpt.model, audio);
  fs::create_directories(out_dir);
  const std::vector<std::string>& sources = ckpt.model.config().sources;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const std::string path = out_dir + "/" + sources[s] + ".wav";
    write_wav(path, stems[s], WavFormat::float32);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int run_eval_sdr(const std::string& ref_dir, const std::string& est_dir,
                 double chunk_seconds) {
  if (!fs::is_directory(ref_dir)) throw IoError(ref_dir + " is not a directory");
  std::vector<std::string> names;
  for (const fs::directory_entry& entry : fs::directory_iterator(ref_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".wav") continue;
    const std::string stem = entry.path().stem().string();
    if (stem != "mixture") names.push_back(stem);
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw IoError(ref_dir + " holds no source .wav files");

  std::vector<AudioBuffer> refs, ests;
  for (const std::string& name : names) {
    refs.push_back(read_wav(ref_dir + "/" + name + ".wav"));
    ests.push_back(read_wav(est_dir + "/" + name + ".wav"));
  }

  SdrReport report = sdr_report(names, refs, ests, chunk_seconds);
  std::printf(
      "# energy-ratio SDR over %.1f s chunks, +100 dB cap, silent chunks excluded;"
      " not comparable to BSSEval figures\n",
      report.chunk_seconds);
  for (const auto& [name, chunks] : report.sources)
    std::printf("source %s median_db %.4f chunks %lld silent %lld\n", name.c_str(),
                chunks.median_db, static_cast<long long>(chunks.total_chunks),
                static_cast<long long>(chunks.silent_chunks));
  std::printf("mean_of_medians %.4f\n", report.mean_of_medians);
  return 0;
}

int run_bench_rtf(const std::string& ckpt_path, double seconds, int reps, int warmup,
                  int sample_rate) {
  LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
  RtfReport report = measure_rtf(ckpt.model, seconds, reps, warmup, sample_rate);
  std::printf("audio_seconds %.3f\n", report.audio_seconds);
  std::printf("repetitions %d\n", report.repetitions);
  std::printf("warmup %d\n", report.warmup);
  std::printf("processing_seconds %.6f\n", report.processing_seconds);
  std::printf("rtf %.6f\n", report.rtf);
  return 0;
}

int run_param_count(const std::string& config_path) {
  AppConfig cfg = load_app_config(config_path);
  ParamCountReport report = param_count(cfg.model);
  for (const ParamCountRow& row : report.rows)
    std::printf("module %s params %lld\n", row.name.c_str(),
                static_cast<long long>(row.count));
  std::printf("total %lld\n", static_cast<long long>(report.total));
  return 0;
}

int run_make_fixtures(const std::string& out_dir, std::uint64_t seed, double seconds,
                      int sample_rate) {
  const FixtureKind kinds[4] = {FixtureKind::band_limited_noise,
                                FixtureKind::sine_chords, FixtureKind::click_pattern,
                                FixtureKind::mixed};
  for (int k = 0; k < 4; ++k) {
    char track[16];
    std::snprintf(track, sizeof track, "track%02d_", k);
    const std::string dir = out_dir + "/" + track + fixture_kind_name(kinds[k]);
    StemSet set = synth_fixture(kinds[k], seconds, seed + static_cast<std::uint64_t>(k),
                                sample_rate);
    write_stem_set(dir, set);
    std::printf("wrote %s\n", dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain music source separation toolkit"};
  app.require_subcommand(1);

  std::int64_t freq_bins = 2049;
  std::vector<double> proportions;
  std::vector<int> strides;
  int blocks = 1;
  auto* plan_cmd = app.add_subcommand("plan-bands", "Print the band split and cascade");
  plan_cmd->add_option("--freq-bins", freq_bins, "Input frequency bins")->required();
  plan_cmd->add_option("--proportions", proportions, "Three band fractions")
      ->delimiter(',');
  plan_cmd->add_option("--strides", strides, "Three band strides")->delimiter(',');
  plan_cmd->add_option("--blocks", blocks, "Cascade depth");

  std::string config_path, data_dir, out_path;
  std::uint64_t seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train on a stem dataset");
  train_cmd->add_option("--config", config_path, "JSON config file")->required();
  train_cmd->add_option("--data", data_dir, "Dataset root directory")->required();
  train_cmd->add_option("--out", out_path, "Checkpoint output path")->required();
  auto* seed_opt = train_cmd->add_option("--seed", seed, "Override the config seed");

  std::string ckpt_path, input_path, out_dir;
  auto* sep_cmd = app.add_subcommand("separate", "Separate a mixture into stems");
  sep_cmd->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  sep_cmd->add_option("--input", input_path, "Mixture wav")->required();
  sep_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

  std::string ref_dir, est_dir;
  double chunk_seconds = 1.0;
  auto* eval_cmd = app.add_subcommand("eval-sdr", "Score estimates against references");
  eval_cmd->add_option("--ref-dir", ref_dir, "Reference stem directory")->required();
  eval_cmd->add_option("--est-dir", est_dir, "Estimated stem directory")->required();
  eval_cmd->add_option("--chunk-seconds", chunk_seconds, "Chunk length in seconds");

  double seconds = 10.0;
  int reps = 5, warmup = 1, sample_rate = 44100;
  auto* bench_cmd = app.add_subcommand("bench-rtf", "Measure the real-time factor");
  bench_cmd->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  bench_cmd->add_option("--seconds", seconds, "Input duration");
  bench_cmd->add_option("--reps", reps, "Timed repetitions");
  bench_cmd->add_option("--warmup", warmup, "Warm-up runs");
  bench_cmd->add_option("--sample-rate", sample_rate, "Input sample rate");

  auto* count_cmd = app.add_subcommand("param-count", "Print the parameter breakdown");
  count_cmd->add_option("--config", config_path, "JSON config file")->required();

  double fix_seconds = 3.0;
  int fix_rate = 44100;
  auto* fix_cmd = app.add_subcommand("make-fixtures", "Write a synthetic dataset");
  fix_cmd->add_option("--out", out_dir, "Output dataset root")->required();
  fix_cmd->add_option("--seed", seed, "Generation seed")->required();
  fix_cmd->add_option("--seconds", fix_seconds, "Track length in seconds");
  fix_cmd->add_option("--sample-rate", fix_rate, "Track sample rate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan_cmd) return run_plan_bands(freq_bins, proportions, strides, blocks);
    if (*train_cmd)
      return run_train(config_path, data_dir, out_path, seed, seed_opt->count() > 0);
    if (*sep_cmd) return run_separate(ckpt_path, input_path, out_dir);
    if (*eval_cmd) return run_eval_sdr(ref_dir, est_dir, chunk_seconds);
    if (*bench_cmd) return run_bench_rtf(ckpt_path, seconds, reps, warmup, sample_rate);
    if (*count_cmd) return run_param_count(config_path);
    if (*fix_cmd) return run_make_fixtures(out_dir, seed, fix_seconds, fix_rate);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
