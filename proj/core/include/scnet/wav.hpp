#pragma once

#include <string>

#include "scnet/spectral.hpp"

namespace scnet {

enum class WavFormat { pcm16, pcm24, float32 };

// RIFF/WAVE reader for 16/24-bit PCM and 32-bit float, 1-2 channels. Unknown
// chunks are skipped; malformed or truncated files raise IoError with the
// byte offset of the problem.
AudioBuffer read_wav(const std::string& path);

// float32 round-trips the (float-precision) samples exactly; the integer
// formats quantize with at most half an LSB of error plus clipping at +-1.
void write_wav(const std::string& path, const AudioBuffer& audio,
               WavFormat format = WavFormat::float32);

}  // namespace scnet
