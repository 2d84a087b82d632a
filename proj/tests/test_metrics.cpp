#include <cmath>
#include <vector>

#include "doctest.h"
#include "scnet/infer.hpp"
#include "scnet/metrics.hpp"
#include "scnet/model.hpp"
#include "scnet/rng.hpp"

using namespace scnet;

namespace {

AudioBuffer make_noise(int sample_rate, std::int64_t length, int channels,
                       std::uint64_t seed, double amp = 0.5) {
  RngState rng(seed);
  AudioBuffer buf;
  buf.sample_rate = sample_rate;
  buf.samples.resize(static_cast<std::size_t>(channels));
  for (auto& ch : buf.samples) {
    ch.resize(static_cast<std::size_t>(length));
    for (double& v : ch) v = rng.uniform(-amp, amp);
  }
  return buf;
}

AudioBuffer scaled(const AudioBuffer& src, double gain) {
  AudioBuffer out = src;
  for (auto& ch : out.samples)
    for (double& v : ch) v *= gain;
  return out;
}

AudioBuffer mixed(const AudioBuffer& a, const AudioBuffer& b, double gb) {
  AudioBuffer out = a;
  for (std::size_t ch = 0; ch < out.samples.size(); ++ch)
    for (std::size_t i = 0; i < out.samples[ch].size(); ++i)
      out.samples[ch][i] += gb * b.samples[ch][i];
  return out;
}

ModelConfig toy_config() {
  ModelConfig cfg;
  cfg.stft.fft_size = 30;
  cfg.stft.hop = 10;
  cfg.bands.proportions = {0.25, 0.375, 0.375};
  cfg.bands.strides = {1, 2, 4};
  cfg.channel_ladder = {8, 16, 32};
  cfg.conv_module_counts = {0, 0, 0};
  cfg.dual_path.n_layers = 2;
  cfg.dual_path.channels = 32;
  cfg.dual_path.hidden_odd = 4;
  cfg.dual_path.hidden_even = 8;
  cfg.sources = {"left", "right"};
  return cfg;
}

Model make_toy_model(std::uint64_t seed) {
  Model model(toy_config());
  RngState rng(seed);
  model.init(rng);
  return model;
}

}  // namespace

TEST_CASE("sdr caps an exact estimate and matches closed forms") {
  AudioBuffer ref = make_noise(100, 300, 2, 11);

  SdrValue exact = sdr(ref, ref);
  CHECK(exact.db == doctest::Approx(100.0));
  CHECK_FALSE(exact.silent_reference);

  // est = ref/2 leaves a residual of ref/2: ratio 4 -> 10*log10(4) dB
  SdrValue half = sdr(ref, scaled(ref, 0.5));
  CHECK(half.db == doctest::Approx(6.020599913).epsilon(1e-6));

  // est = 0 gives residual == ref: 0 dB
  SdrValue zero = sdr(ref, scaled(ref, 0.0));
  CHECK(zero.db == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sdr flags a silent reference instead of scoring it") {
  AudioBuffer silent = make_noise(100, 200, 1, 5, 0.0);
  AudioBuffer est = make_noise(100, 200, 1, 6);
  SdrValue v = sdr(silent, est);
  CHECK(v.silent_reference);
  CHECK(std::isnan(v.db));
}

TEST_CASE("sdr is invariant to a shared gain") {
  AudioBuffer ref = make_noise(100, 400, 2, 21);
  AudioBuffer est = mixed(ref, make_noise(100, 400, 2, 22), 0.2);
  const double base = sdr(ref, est).db;
  const double gained = sdr(scaled(ref, 3.5), scaled(est, 3.5)).db;
  CHECK(gained == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("sdr falls as additive noise grows") {
  AudioBuffer ref = make_noise(100, 500, 2, 31);
  AudioBuffer noise = make_noise(100, 500, 2, 32);
  double prev = 1e9;
  for (double sigma : {0.01, 0.1, 0.3, 1.0}) {
    const double db = sdr(ref, mixed(ref, noise, sigma)).db;
    CHECK(db < prev);
    prev = db;
  }
}

TEST_CASE("sdr validates matching geometry") {
  AudioBuffer a = make_noise(100, 200, 2, 41);
  AudioBuffer b = make_noise(100, 200, 1, 42);
  CHECK_THROWS_AS(sdr(a, b), ShapeError);
  AudioBuffer c = make_noise(100, 199, 2, 43);
  CHECK_THROWS_AS(sdr(a, c), ShapeError);
  AudioBuffer d = make_noise(200, 200, 2, 44);
  CHECK_THROWS_AS(sdr(a, d), ShapeError);
}

TEST_CASE("a single chunk reproduces the whole-signal sdr") {
  AudioBuffer ref = make_noise(200, 200, 2, 51);
  AudioBuffer est = mixed(ref, make_noise(200, 200, 2, 52), 0.1);
  SdrChunks chunks = chunked_median_sdr(ref, est, 1.0);
  CHECK(chunks.total_chunks == 1);
  CHECK(chunks.silent_chunks == 0);
  REQUIRE(chunks.chunk_db.size() == 1);
  CHECK(chunks.median_db == doctest::Approx(sdr(ref, est).db).epsilon(1e-12));
}

TEST_CASE("chunk count is the floor of the duration ratio") {
  AudioBuffer ref = make_noise(100, 270, 1, 61);
  AudioBuffer est = mixed(ref, make_noise(100, 270, 1, 62), 0.2);
  SdrChunks chunks = chunked_median_sdr(ref, est, 1.0);
  CHECK(chunks.total_chunks == 2);  // 2.7 s of audio, 1 s chunks
  CHECK(chunks.chunk_db.size() == 2);
}

TEST_CASE("stationary noise gives a chunked median near the whole-signal sdr") {
  AudioBuffer ref = make_noise(1000, 5000, 2, 71);
  AudioBuffer est = mixed(ref, make_noise(1000, 5000, 2, 72), 0.1);
  SdrChunks chunks = chunked_median_sdr(ref, est, 1.0);
  CHECK(chunks.total_chunks == 5);
  CHECK(std::abs(chunks.median_db - sdr(ref, est).db) <= 0.1);
}

TEST_CASE("the chunk median ignores chunk order") {
  const int sr = 100;
  std::vector<AudioBuffer> refs, ests;
  for (int k = 0; k < 3; ++k) {
    AudioBuffer r = make_noise(sr, sr, 1, 80 + static_cast<std::uint64_t>(k));
    refs.push_back(r);
    ests.push_back(mixed(r, make_noise(sr, sr, 1, 90 + static_cast<std::uint64_t>(k)),
                         0.05 * (k + 1)));
  }
  auto build = [&](std::vector<int> order) {
    AudioBuffer ref, est;
    ref.sample_rate = est.sample_rate = sr;
    ref.samples.resize(1);
    est.samples.resize(1);
    for (int k : order) {
      ref.samples[0].insert(ref.samples[0].end(), refs[k].samples[0].begin(),
                            refs[k].samples[0].end());
      est.samples[0].insert(est.samples[0].end(), ests[k].samples[0].begin(),
                            ests[k].samples[0].end());
    }
    return std::pair<AudioBuffer, AudioBuffer>{ref, est};
  };
  auto [r1, e1] = build({0, 1, 2});
  auto [r2, e2] = build({2, 0, 1});
  CHECK(chunked_median_sdr(r1, e1).median_db ==
        doctest::Approx(chunked_median_sdr(r2, e2).median_db).epsilon(1e-12));
}

TEST_CASE("silent chunks are excluded from the median") {
  const int sr = 100;
  AudioBuffer ref = make_noise(sr, 3 * sr, 1, 101);
  for (int i = sr; i < 2 * sr; ++i) ref.samples[0][static_cast<std::size_t>(i)] = 0.0;
  AudioBuffer est = mixed(ref, make_noise(sr, 3 * sr, 1, 102), 0.1);
  SdrChunks chunks = chunked_median_sdr(ref, est, 1.0);
  CHECK(chunks.total_chunks == 3);
  CHECK(chunks.silent_chunks == 1);
  REQUIRE(chunks.chunk_db.size() == 2);
  const double lo = std::min(chunks.chunk_db[0], chunks.chunk_db[1]);
  const double hi = std::max(chunks.chunk_db[0], chunks.chunk_db[1]);
  CHECK(chunks.median_db == doctest::Approx(0.5 * (lo + hi)));
}

TEST_CASE("chunked sdr rejects degenerate inputs") {
  AudioBuffer ref = make_noise(100, 250, 1, 111);
  AudioBuffer est = make_noise(100, 250, 1, 112);
  CHECK_THROWS_AS(chunked_median_sdr(ref, est, 0.0), ConfigError);
  CHECK_THROWS_AS(chunked_median_sdr(ref, est, -1.0), ConfigError);

  AudioBuffer shorter = make_noise(100, 60, 1, 113);
  AudioBuffer shorter_est = make_noise(100, 60, 1, 114);
  CHECK_THROWS_AS(chunked_median_sdr(shorter, shorter_est, 1.0), DimensionError);

  AudioBuffer silent = make_noise(100, 200, 1, 115, 0.0);
  AudioBuffer silent_est = make_noise(100, 200, 1, 116);
  CHECK_THROWS_AS(chunked_median_sdr(silent, silent_est, 1.0), NumericError);
}

TEST_CASE("sdr_report aggregates per-source medians") {
  std::vector<std::string> names{"left", "right"};
  std::vector<AudioBuffer> refs{make_noise(100, 300, 2, 121),
                                make_noise(100, 300, 2, 122)};
  std::vector<AudioBuffer> ests{
      mixed(refs[0], make_noise(100, 300, 2, 123), 0.1),
      mixed(refs[1], make_noise(100, 300, 2, 124), 0.3)};
  SdrReport report = sdr_report(names, refs, ests, 1.0);
  REQUIRE(report.sources.size() == 2);
  CHECK(report.sources[0].first == "left");
  CHECK(report.sources[1].first == "right");
  CHECK(report.sources[0].second.median_db > report.sources[1].second.median_db);
  const double mean =
      0.5 * (report.sources[0].second.median_db + report.sources[1].second.median_db);
  CHECK(report.mean_of_medians == doctest::Approx(mean));

  CHECK_THROWS_AS(sdr_report({}, {}, {}, 1.0), DimensionError);
  CHECK_THROWS_AS(sdr_report(names, refs, {ests[0]}, 1.0), ShapeError);
}

TEST_CASE("crossfade weights sum to one everywhere") {
  for (auto [n, win, hop] : {std::tuple<int, int, int>{3, 8, 4},
                             std::tuple<int, int, int>{4, 6, 6},
                             std::tuple<int, int, int>{2, 10, 7}}) {
    std::vector<std::vector<double>> windows(
        static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(win), 1.0));
    const std::int64_t total = static_cast<std::int64_t>(hop) * (n - 1) + win;
    auto out = crossfade_stitch(windows, hop, total);
    REQUIRE(static_cast<std::int64_t>(out.size()) == total);
    for (double v : out) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("stitching reproduces a signal the windows agree on") {
  RngState rng(131);
  std::vector<double> base(23);
  for (double& v : base) v = rng.uniform(-1.0, 1.0);
  const std::int64_t win = 10, hop = 5;
  std::vector<std::vector<double>> windows;
  for (std::int64_t start = 0; start == 0 || start - hop + win < 23; start += hop) {
    std::vector<double> w(static_cast<std::size_t>(win), 0.0);
    for (std::int64_t i = 0; i < win && start + i < 23; ++i)
      w[static_cast<std::size_t>(i)] = base[static_cast<std::size_t>(start + i)];
    windows.push_back(w);
  }
  auto out = crossfade_stitch(windows, hop, 23);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(out[i] == doctest::Approx(base[i]).epsilon(1e-12));
}

TEST_CASE("crossfade stitching validates its geometry") {
  std::vector<std::vector<double>> windows(2, std::vector<double>(10, 1.0));
  CHECK_THROWS_AS(crossfade_stitch({}, 5, 10), DimensionError);
  CHECK_THROWS_AS(crossfade_stitch(windows, 0, 10), DimensionError);
  CHECK_THROWS_AS(crossfade_stitch(windows, 11, 21), DimensionError);  // gap
  CHECK_THROWS_AS(crossfade_stitch(windows, 3, 13), DimensionError);   // > half overlap
  CHECK_THROWS_AS(crossfade_stitch(windows, 5, 40), DimensionError);   // uncovered tail
  std::vector<std::vector<double>> ragged{std::vector<double>(10, 1.0),
                                          std::vector<double>(9, 1.0)};
  CHECK_THROWS_AS(crossfade_stitch(ragged, 5, 14), ShapeError);
}

TEST_CASE("separate_clip returns per-source stems shaped like the input") {
  Model model = make_toy_model(7);
  AudioBuffer clip = make_noise(1000, 400, 2, 141);
  auto stems = separate_clip(model, clip);
  REQUIRE(stems.size() == 2);
  for (const AudioBuffer& s : stems) {
    CHECK(s.channels() == 2);
    CHECK(s.length() == 400);
    CHECK(s.sample_rate == 1000);
    for (const auto& ch : s.samples)
      for (double v : ch) CHECK(std::isfinite(v));
  }

  auto again = separate_clip(model, clip);
  CHECK(again[0].samples[0] == stems[0].samples[0]);
  CHECK(again[1].samples[1] == stems[1].samples[1]);

  AudioBuffer mono = make_noise(1000, 250, 1, 142);
  auto mono_stems = separate_clip(model, mono);
  REQUIRE(mono_stems.size() == 2);
  CHECK(mono_stems[0].channels() == 1);
  CHECK(mono_stems[0].length() == 250);
}

TEST_CASE("separate_long matches the input length for awkward durations") {
  Model model = make_toy_model(9);
  ChunkingConfig chunking;
  chunking.window_seconds = 0.2;  // 200 samples at 1 kHz
  chunking.overlap = 0.5;
  for (std::int64_t len : {50, 200, 201, 350, 512}) {
    AudioBuffer clip = make_noise(1000, len, 2, 150 + static_cast<std::uint64_t>(len));
    auto stems = separate_long(model, clip, chunking);
    REQUIRE(stems.size() == 2);
    for (const AudioBuffer& s : stems) {
      CHECK(s.length() == len);
      CHECK(s.channels() == 2);
      for (const auto& ch : s.samples)
        for (double v : ch) CHECK(std::isfinite(v));
    }
  }

  AudioBuffer clip = make_noise(1000, 333, 2, 160);
  auto a = separate_long(model, clip, chunking);
  auto b = separate_long(model, clip, chunking);
  CHECK(a[0].samples[0] == b[0].samples[0]);

  ChunkingConfig bad = chunking;
  bad.overlap = 0.6;
  CHECK_THROWS_AS(separate_long(model, clip, bad), ConfigError);
  bad = chunking;
  bad.window_seconds = 0.0;
  CHECK_THROWS_AS(separate_long(model, clip, bad), ConfigError);
}

TEST_CASE("measure_rtf reports a positive factor and validates its knobs") {
  Model model = make_toy_model(11);
  RtfReport report = measure_rtf(model, 0.1, 3, 1, 1000);
  CHECK(report.rtf > 0.0);
  CHECK(report.processing_seconds > 0.0);
  CHECK(report.audio_seconds == doctest::Approx(0.1));
  CHECK(report.repetitions == 3);
  CHECK(report.warmup == 1);

  CHECK_THROWS_AS(measure_rtf(model, 0.1, 2, 1, 1000), ConfigError);
  CHECK_THROWS_AS(measure_rtf(model, 0.1, 3, 0, 1000), ConfigError);
  CHECK_THROWS_AS(measure_rtf(model, 0.0, 3, 1, 1000), ConfigError);
}
