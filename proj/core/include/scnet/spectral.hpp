#pragma once

#include <cstdint>
#include <vector>

#include "scnet/tensor.hpp"

namespace scnet {

struct AudioBuffer {
  std::vector<std::vector<double>> samples;  // per channel
  int sample_rate = 44100;

  std::int64_t channels() const {
    return static_cast<std::int64_t>(samples.size());
  }
  std::int64_t length() const {
    return samples.empty() ? 0 : static_cast<std::int64_t>(samples[0].size());
  }
  void validate() const;  // channel count, equal lengths, finite values
};

struct StftConfig {
  std::int64_t fft_size = 4096;
  std::int64_t hop = 1024;

  std::int64_t bins() const { return fft_size / 2 + 1; }
  void validate() const;
};

// Complex frames packed for the model: data is [F, T, channels*2] with the
// feature order [ch0.re, ch0.im, ch1.re, ch1.im].
struct ComplexSpectrogram {
  TensorPtr data;
  std::int64_t source_length = 0;  // original sample count, for inversion
  std::int64_t fft_size = 0;
  std::int64_t hop = 0;
  int sample_rate = 44100;

  std::int64_t bins() const { return data ? data->dim(0) : 0; }
  std::int64_t frames() const { return data ? data->dim(1) : 0; }
  std::int64_t features() const { return data ? data->dim(2) : 0; }
};

// Rectangular-window STFT. The signal is zero-padded by fft_size - hop on
// both ends (plus round-up so the hop divides evenly); mono input is
// duplicated to stereo before packing.
ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& cfg);

// Overlap-add inverse, normalized by accumulated window coverage and cropped
// to `length` samples.
AudioBuffer istft(const ComplexSpectrogram& spec, const StftConfig& cfg,
                  std::int64_t length);

}  // namespace scnet
