#include "scnet/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "scnet/errors.hpp"
#include "scnet/rng.hpp"

namespace fs = std::filesystem;

namespace scnet {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

struct Register {
  double lo, hi;
};

// Stem registers in Hz; the upper edge bends down for low sample rates.
Register stem_register(const char* name, int sr) {
  const double cap = 0.45 * sr;
  Register r{40.0, 240.0};
  if (std::string(name) == "vocals") r = {250.0, 2200.0};
  if (std::string(name) == "other") r = {500.0, 6000.0};
  r.hi = std::min(r.hi, cap);
  r.lo = std::min(r.lo, 0.5 * r.hi);
  return r;
}

std::vector<double> tone_cluster(RngState& rng, const Register& reg, std::int64_t len,
                                 int sr, int partials) {
  std::vector<double> out(static_cast<std::size_t>(len), 0.0);
  for (int p = 0; p < partials; ++p) {
    const double f = rng.uniform(reg.lo, reg.hi);
    const double phase = rng.uniform(0.0, kTau);
    const double amp = rng.uniform(0.5, 1.0) / partials;
    const double w = kTau * f / sr;
    for (std::int64_t i = 0; i < len; ++i)
      out[static_cast<std::size_t>(i)] += amp * std::sin(w * i + phase);
  }
  return out;
}

std::vector<double> chord(RngState& rng, const Register& reg, std::int64_t len, int sr) {
  const double f0 = rng.uniform(reg.lo, std::max(reg.lo * 1.01, reg.hi / 2.0));
  const double ratios[4] = {1.0, 1.25, 1.5, 2.0};
  const double trem_phase = rng.uniform(0.0, kTau);
  std::vector<double> out(static_cast<std::size_t>(len), 0.0);
  for (double ratio : ratios) {
    const double f = std::min(f0 * ratio, reg.hi);
    const double phase = rng.uniform(0.0, kTau);
    const double w = kTau * f / sr;
    for (std::int64_t i = 0; i < len; ++i)
      out[static_cast<std::size_t>(i)] += 0.25 * std::sin(w * i + phase);
  }
  const double trem_w = kTau * 0.5 / sr;
  for (std::int64_t i = 0; i < len; ++i)
    out[static_cast<std::size_t>(i)] *=
        (1.0 + 0.3 * std::sin(trem_w * i + trem_phase)) / 1.3;
  return out;
}

// Periodic bursts. Broadband ones are short decaying noise hits; tonal ones
// are Hann-windowed sinusoid grains, whose smooth envelope keeps the spectrum
// within a few tens of Hz of the carrier.
std::vector<double> clicks(RngState& rng, double rate_hz, const Register& reg,
                           bool broadband, std::int64_t len, int sr) {
  std::vector<double> out(static_cast<std::size_t>(len), 0.0);
  const double period = sr / rate_hz;
  const std::int64_t burst =
      std::max<std::int64_t>(4, broadband ? sr / 100 : sr / 8);  // 10 ms vs 125 ms
  const double tau = std::max(1.0, 0.003 * sr);
  for (double start = rng.uniform(0.0, period); start < static_cast<double>(len);
       start += period * rng.uniform(0.9, 1.1)) {
    const std::int64_t s = static_cast<std::int64_t>(start);
    const double f = broadband ? 0.0 : rng.uniform(reg.lo, reg.hi);
    const double phase = broadband ? 0.0 : rng.uniform(0.0, kTau);
    const double w = kTau * f / sr;
    for (std::int64_t i = 0; i < burst && s + i < len; ++i) {
      const double env =
          broadband ? std::exp(-static_cast<double>(i) / tau)
                    : 0.5 * (1.0 - std::cos(kTau * (i + 0.5) / burst));
      const double body = broadband ? rng.normal() * 0.5 : std::sin(w * i + phase);
      out[static_cast<std::size_t>(s + i)] += env * body;
    }
  }
  return out;
}

std::vector<double> stem_channel(RngState& rng, FixtureKind kind, const char* name,
                                 std::int64_t len, int sr) {
  const Register reg = stem_register(name, sr);
  const std::string stem(name);
  if (stem == "drums") return clicks(rng, 4.0, reg, true, len, sr);
  switch (kind) {
    case FixtureKind::band_limited_noise:
      return tone_cluster(rng, reg, len, sr, 24);
    case FixtureKind::sine_chords:
      return chord(rng, reg, len, sr);
    case FixtureKind::click_pattern:
      return clicks(rng, stem == "bass" ? 2.0 : stem == "other" ? 5.0 : 3.0, reg,
                    false, len, sr);
    case FixtureKind::mixed:
      return stem == "vocals" ? chord(rng, reg, len, sr)
                              : tone_cluster(rng, reg, len, sr, 24);
  }
  throw ConfigError("kind is not a known fixture kind");
}

}  // namespace

FixtureKind fixture_kind_from_name(const std::string& name) {
  if (name == "band-limited-noise") return FixtureKind::band_limited_noise;
  if (name == "sine-chords") return FixtureKind::sine_chords;
  if (name == "click-pattern") return FixtureKind::click_pattern;
  if (name == "mixed") return FixtureKind::mixed;
  throw ConfigError("kind \"" + name +
                    "\" is not one of band-limited-noise, sine-chords, "
                    "click-pattern, mixed");
}

std::string fixture_kind_name(FixtureKind kind) {
  switch (kind) {
    case FixtureKind::band_limited_noise: return "band-limited-noise";
    case FixtureKind::sine_chords: return "sine-chords";
    case FixtureKind::click_pattern: return "click-pattern";
    case FixtureKind::mixed: return "mixed";
  }
  throw ConfigError("kind is not a known fixture kind");
}

StemSet synth_fixture(FixtureKind kind, double seconds, std::uint64_t seed,
                      int sample_rate) {
  if (!(seconds > 0.0)) throw ConfigError("seconds must be positive");
  if (sample_rate < 1) throw ConfigError("sample_rate must be positive");
  const std::int64_t len = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(seconds * sample_rate)));

  RngState rng(seed);
  StemSet set;
  set.names = {"drums", "bass", "other", "vocals"};
  for (const std::string& name : set.names) {
    AudioBuffer stem;
    stem.sample_rate = sample_rate;
    for (int ch = 0; ch < 2; ++ch) {
      std::vector<double> samples = stem_channel(rng, kind, name.c_str(), len, sample_rate);
      for (double& v : samples) v *= 0.25;
      stem.samples.push_back(std::move(samples));
    }
    set.stems.push_back(std::move(stem));
  }
  remix_in_place(set);
  return set;
}

void write_stem_set(const std::string& dir, const StemSet& set, WavFormat format) {
  if (set.names.size() != set.stems.size())
    throw ConfigError("names and stems must align");
  fs::create_directories(dir);
  write_wav(dir + "/mixture.wav", set.mixture, format);
  for (std::size_t i = 0; i < set.names.size(); ++i)
    write_wav(dir + "/" + set.names[i] + ".wav", set.stems[i], format);
}

StemSet read_stem_set(const std::string& dir, const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("names must not be empty");
  StemSet set;
  set.names = names;
  set.mixture = read_wav(dir + "/mixture.wav");
  for (const std::string& name : names) {
    const std::string path = dir + "/" + name + ".wav";
    AudioBuffer stem = read_wav(path);
    if (stem.sample_rate != set.mixture.sample_rate)
      throw IoError(path + ": sample rate " + std::to_string(stem.sample_rate) +
                    " differs from the mixture's " +
                    std::to_string(set.mixture.sample_rate));
    if (stem.length() != set.mixture.length())
      throw IoError(path + ": length " + std::to_string(stem.length()) +
                    " differs from the mixture's " +
                    std::to_string(set.mixture.length()));
    if (stem.channels() != set.mixture.channels())
      throw IoError(path + ": channel count differs from the mixture's");
    set.stems.push_back(std::move(stem));
  }
  return set;
}

std::vector<std::string> list_tracks(const std::string& root) {
  if (!fs::is_directory(root)) throw IoError(root + " is not a directory");
  std::vector<std::string> tracks;
  for (const fs::directory_entry& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "mixture.wav"))
      tracks.push_back(entry.path().string());
  }
  std::sort(tracks.begin(), tracks.end());
  return tracks;
}

}  // namespace scnet
