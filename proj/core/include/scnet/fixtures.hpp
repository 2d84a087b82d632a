#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scnet/train.hpp"
#include "scnet/wav.hpp"

namespace scnet {

// Texture families for synthetic four-stem tracks. Every kind emits the fixed
// source order drums, bass, other, vocals; the bass stem is always built from
// components below 250 Hz, drums are broadband, vocals mid-register.
enum class FixtureKind { band_limited_noise, sine_chords, click_pattern, mixed };

FixtureKind fixture_kind_from_name(const std::string& name);  // ConfigError on unknown
std::string fixture_kind_name(FixtureKind kind);

// Deterministic stereo stems with mixture == exact stem sum.
StemSet synth_fixture(FixtureKind kind, double seconds, std::uint64_t seed,
                      int sample_rate = 44100);

// One track = one directory holding mixture.wav plus <source>.wav per stem.
void write_stem_set(const std::string& dir, const StemSet& set,
                    WavFormat format = WavFormat::float32);
StemSet read_stem_set(const std::string& dir, const std::vector<std::string>& names);

// Immediate subdirectories of root that contain a mixture.wav, sorted by name.
std::vector<std::string> list_tracks(const std::string& root);

}  // namespace scnet
