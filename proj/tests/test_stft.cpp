#include <cmath>

#include "doctest.h"
#include "scnet/errors.hpp"
#include "scnet/rng.hpp"
#include "scnet/spectral.hpp"

using namespace scnet;

namespace {

AudioBuffer noise(std::int64_t length, int channels, std::uint64_t seed,
                  int sr = 44100) {
  RngState rng(seed);
  AudioBuffer a;
  a.sample_rate = sr;
  a.samples.resize(static_cast<std::size_t>(channels));
  for (auto& ch : a.samples) {
    ch.resize(static_cast<std::size_t>(length));
    for (auto& v : ch) v = rng.normal() * 0.3;
  }
  return a;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b,
              std::size_t from, std::size_t to) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = from; i < to; ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += a[i] * a[i];
  }
  return std::sqrt(num / std::max(den, 1e-30));
}

}  // namespace

TEST_CASE("config and buffer validation") {
  StftConfig bad;
  bad.fft_size = 4095;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.fft_size = 4096;
  bad.hop = 8192;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  AudioBuffer empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);
  AudioBuffer three;
  three.samples.assign(3, {0.0});
  CHECK_THROWS_AS(three.validate(), ConfigError);
  AudioBuffer ragged;
  ragged.samples = {{0.0, 0.0}, {0.0}};
  CHECK_THROWS_AS(ragged.validate(), ConfigError);
}

TEST_CASE("zero waveform produces a zero spectrogram") {
  AudioBuffer a;
  a.samples.assign(2, std::vector<double>(5000, 0.0));
  StftConfig cfg;
  auto s = stft(a, cfg);
  for (double v : s.data->data) CHECK(v == 0.0);
}

TEST_CASE("one second of stereo at defaults lands on 2049 bins") {
  auto a = noise(44100, 2, 5);
  StftConfig cfg;
  auto s = stft(a, cfg);
  CHECK(s.bins() == 2049);
  CHECK(s.features() == 4);
  CHECK(s.frames() == 47);
  CHECK(s.source_length == 44100);
}

TEST_CASE("mono input is duplicated into both channel pairs") {
  auto a = noise(3000, 1, 7);
  StftConfig cfg;
  cfg.fft_size = 512;
  cfg.hop = 128;
  auto s = stft(a, cfg);
  const auto& d = s.data->data;
  for (std::int64_t f = 0; f < s.bins(); f += 37)
    for (std::int64_t t = 0; t < s.frames(); t += 5) {
      const std::int64_t off = (f * s.frames() + t) * 4;
      CHECK(d[off + 0] == d[off + 2]);
      CHECK(d[off + 1] == d[off + 3]);
    }
}

TEST_CASE("round trip reconstructs random audio") {
  StftConfig cfg;
  cfg.fft_size = 1024;
  cfg.hop = 256;
  for (std::uint64_t seed : {11ull, 12ull}) {
    auto a = noise(20000, 2, seed);
    auto s = stft(a, cfg);
    auto back = istft(s, cfg, a.length());
    for (int ch = 0; ch < 2; ++ch) {
      const auto e = rel_l2(a.samples[static_cast<std::size_t>(ch)],
                            back.samples[static_cast<std::size_t>(ch)], 0,
                            a.samples[0].size());
      CHECK(e <= 1e-6);
    }
  }
}

TEST_CASE("round trip at paper defaults") {
  StftConfig cfg;
  auto a = noise(44100, 2, 13);
  auto back = istft(stft(a, cfg), cfg, a.length());
  for (int ch = 0; ch < 2; ++ch)
    CHECK(rel_l2(a.samples[static_cast<std::size_t>(ch)],
                 back.samples[static_cast<std::size_t>(ch)], 0,
                 a.samples[0].size()) <= 1e-6);
}

TEST_CASE("round trip across hop divisors") {
  for (std::int64_t hop : {64, 128, 256, 512}) {
    StftConfig cfg;
    cfg.fft_size = 512;
    cfg.hop = hop;
    auto a = noise(7000, 2, static_cast<std::uint64_t>(hop));
    auto back = istft(stft(a, cfg), cfg, a.length());
    CHECK(rel_l2(a.samples[0], back.samples[0], 0, a.samples[0].size()) <= 1e-6);
  }
}

TEST_CASE("short input is zero padded up to one frame") {
  AudioBuffer a;
  a.samples.assign(1, std::vector<double>(100, 0.25));
  StftConfig cfg;
  cfg.fft_size = 512;
  cfg.hop = 512;  // no overlap, no edge padding
  auto s = stft(a, cfg);
  CHECK(s.frames() >= 1);
  auto back = istft(s, cfg, 100);
  for (double v : back.samples[0]) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("stft is linear in the waveform") {
  StftConfig cfg;
  cfg.fft_size = 256;
  cfg.hop = 64;
  auto a = noise(4000, 2, 17);
  auto b = noise(4000, 2, 19);
  AudioBuffer mix;
  mix.sample_rate = a.sample_rate;
  mix.samples.assign(2, std::vector<double>(4000));
  for (std::size_t ch = 0; ch < 2; ++ch)
    for (std::size_t i = 0; i < 4000; ++i)
      mix.samples[ch][i] = 2.0 * a.samples[ch][i] - 0.5 * b.samples[ch][i];
  auto sa = stft(a, cfg), sb = stft(b, cfg), sm = stft(mix, cfg);
  for (std::size_t i = 0; i < sm.data->data.size(); ++i)
    CHECK(sm.data->data[i] ==
          doctest::Approx(2.0 * sa.data->data[i] - 0.5 * sb.data->data[i])
              .epsilon(1e-9));
}

TEST_CASE("istft is linear in the spectrogram") {
  StftConfig cfg;
  cfg.fft_size = 256;
  cfg.hop = 64;
  auto s1 = stft(noise(3000, 2, 23), cfg);
  auto s2 = stft(noise(3000, 2, 29), cfg);
  ComplexSpectrogram mixed = s1;
  mixed.data = Tensor::create(s1.data->shape);
  for (std::size_t i = 0; i < mixed.data->data.size(); ++i)
    mixed.data->data[i] = 1.5 * s1.data->data[i] + 0.25 * s2.data->data[i];
  auto w1 = istft(s1, cfg, 3000), w2 = istft(s2, cfg, 3000);
  auto wm = istft(mixed, cfg, 3000);
  for (int ch = 0; ch < 2; ++ch)
    for (std::size_t i = 0; i < 3000; ++i)
      CHECK(wm.samples[static_cast<std::size_t>(ch)][i] ==
            doctest::Approx(1.5 * w1.samples[static_cast<std::size_t>(ch)][i] +
                            0.25 * w2.samples[static_cast<std::size_t>(ch)][i])
                .epsilon(1e-9));
}

TEST_CASE("440 Hz tone concentrates energy around bin 41") {
  AudioBuffer a;
  a.sample_rate = 44100;
  a.samples.assign(1, std::vector<double>(44100));
  for (std::size_t i = 0; i < 44100; ++i)
    a.samples[0][i] =
        std::sin(2.0 * M_PI * 440.0 * static_cast<double>(i) / 44100.0);
  StftConfig cfg;
  auto s = stft(a, cfg);
  // fully populated frames only (no zero-padded edges)
  const std::int64_t left_pad = cfg.fft_size - cfg.hop;
  for (std::int64_t t = 0; t < s.frames(); ++t) {
    const std::int64_t start = t * cfg.hop - left_pad;
    if (start < 0 || start + cfg.fft_size > 44100) continue;
    double total = 0.0, in_band = 0.0;
    for (std::int64_t f = 0; f < s.bins(); ++f) {
      const std::int64_t off = (f * s.frames() + t) * 4;
      const double e = s.data->data[off] * s.data->data[off] +
                       s.data->data[off + 1] * s.data->data[off + 1];
      const double w = (f == 0 || f == s.bins() - 1) ? 1.0 : 2.0;
      total += w * e;
      if (f >= 39 && f <= 42) in_band += w * e;
    }
    CHECK(in_band / total >= 0.90);
  }
}

TEST_CASE("istft rejects a mismatched config naming the field") {
  StftConfig cfg;
  cfg.fft_size = 512;
  cfg.hop = 128;
  auto s = stft(noise(2000, 2, 31), cfg);
  StftConfig other = cfg;
  other.hop = 256;
  CHECK_THROWS_WITH_AS(istft(s, other, 2000), doctest::Contains("hop"),
                       ConfigError);
  StftConfig other2 = cfg;
  other2.fft_size = 1024;
  other2.hop = 128;
  CHECK_THROWS_WITH_AS(istft(s, other2, 2000), doctest::Contains("fft_size"),
                       ConfigError);
}
