#include "scnet/spectral.hpp"

#include <cmath>
#include <string>

#include "scnet/errors.hpp"
#include "scnet/fft.hpp"

namespace scnet {

void AudioBuffer::validate() const {
  if (samples.empty() || samples.size() > 2)
    throw ConfigError("channels must be 1 or 2, got " +
                      std::to_string(samples.size()));
  if (samples[0].empty()) throw ConfigError("length must be >= 1");
  for (const auto& ch : samples) {
    if (ch.size() != samples[0].size())
      throw ConfigError("channels must share one length");
    for (double v : ch)
      if (!std::isfinite(v)) throw NumericError("audio contains non-finite samples");
  }
  if (sample_rate < 1)
    throw ConfigError("sample_rate must be positive, got " +
                      std::to_string(sample_rate));
}

void StftConfig::validate() const {
  if (fft_size < 2 || fft_size % 2 != 0)
    throw ConfigError("fft_size must be even and >= 2, got " +
                      std::to_string(fft_size));
  if (hop < 1 || hop > fft_size)
    throw ConfigError("hop must be in [1, fft_size], got " + std::to_string(hop));
}

namespace {

struct Framing {
  std::int64_t left_pad = 0;
  std::int64_t padded_len = 0;
  std::int64_t frames = 0;
};

Framing framing_for(std::int64_t length, const StftConfig& cfg) {
  Framing f;
  f.left_pad = cfg.fft_size - cfg.hop;
  f.padded_len = f.left_pad + length + f.left_pad;
  if (f.padded_len < cfg.fft_size) f.padded_len = cfg.fft_size;
  const std::int64_t rem = (f.padded_len - cfg.fft_size) % cfg.hop;
  if (rem != 0) f.padded_len += cfg.hop - rem;
  f.frames = (f.padded_len - cfg.fft_size) / cfg.hop + 1;
  return f;
}

}  // namespace

ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& cfg) {
  audio.validate();
  cfg.validate();
  const std::int64_t length = audio.length();
  const Framing fr = framing_for(length, cfg);
  const std::int64_t bins = cfg.bins();

  ComplexSpectrogram spec;
  spec.source_length = length;
  spec.fft_size = cfg.fft_size;
  spec.hop = cfg.hop;
  spec.sample_rate = audio.sample_rate;
  spec.data = Tensor::create({bins, fr.frames, 4});

  std::vector<double> frame(static_cast<std::size_t>(cfg.fft_size));
  std::vector<double> re(static_cast<std::size_t>(bins)),
      im(static_cast<std::size_t>(bins));
  double* out = spec.data->data.data();
  const std::int64_t t_stride = 4;
  const std::int64_t f_stride = fr.frames * 4;
  for (std::int64_t ch = 0; ch < 2; ++ch) {
    // mono input feeds both feature pairs
    const auto& src = audio.samples[static_cast<std::size_t>(
        audio.channels() == 1 ? 0 : ch)];
    for (std::int64_t t = 0; t < fr.frames; ++t) {
      const std::int64_t base = t * cfg.hop - fr.left_pad;
      for (std::int64_t j = 0; j < cfg.fft_size; ++j) {
        const std::int64_t p = base + j;
        frame[static_cast<std::size_t>(j)] =
            (p >= 0 && p < length) ? src[static_cast<std::size_t>(p)] : 0.0;
      }
      fft::rdft(frame.data(), static_cast<std::size_t>(cfg.fft_size), re.data(),
                im.data());
      for (std::int64_t f = 0; f < bins; ++f) {
        out[f * f_stride + t * t_stride + 2 * ch] =
            re[static_cast<std::size_t>(f)];
        out[f * f_stride + t * t_stride + 2 * ch + 1] =
            im[static_cast<std::size_t>(f)];
      }
    }
  }
  check_finite(spec.data->data, "stft");
  return spec;
}

AudioBuffer istft(const ComplexSpectrogram& spec, const StftConfig& cfg,
                  std::int64_t length) {
  cfg.validate();
  if (!spec.data) throw ConfigError("spectrogram data is empty");
  if (spec.fft_size != cfg.fft_size)
    throw ConfigError("fft_size mismatch: spectrogram " +
                      std::to_string(spec.fft_size) + " vs config " +
                      std::to_string(cfg.fft_size));
  if (spec.hop != cfg.hop)
    throw ConfigError("hop mismatch: spectrogram " + std::to_string(spec.hop) +
                      " vs config " + std::to_string(cfg.hop));
  if (spec.bins() != cfg.bins())
    throw ConfigError("bins mismatch: spectrogram " +
                      std::to_string(spec.bins()) + " vs config " +
                      std::to_string(cfg.bins()));
  if (spec.features() != 4)
    throw ConfigError("features must be 4, got " +
                      std::to_string(spec.features()));
  if (length < 1)
    throw ConfigError("length must be >= 1, got " + std::to_string(length));

  const std::int64_t bins = cfg.bins();
  const std::int64_t frames = spec.frames();
  // Geometry comes from the stored frame count, not the requested length, so
  // the crop length is free to differ from the analysis length.
  Framing fr;
  fr.left_pad = cfg.fft_size - cfg.hop;
  fr.padded_len = (frames - 1) * cfg.hop + cfg.fft_size;
  fr.frames = frames;

  AudioBuffer audio;
  audio.sample_rate = spec.sample_rate;
  audio.samples.assign(2, std::vector<double>(static_cast<std::size_t>(length),
                                              0.0));

  const double* in = spec.data->data.data();
  const std::int64_t t_stride = 4;
  const std::int64_t f_stride = frames * 4;
  std::vector<double> acc(static_cast<std::size_t>(fr.padded_len));
  std::vector<double> cover(static_cast<std::size_t>(fr.padded_len));
  std::vector<double> re(static_cast<std::size_t>(bins)),
      im(static_cast<std::size_t>(bins));
  std::vector<double> frame(static_cast<std::size_t>(cfg.fft_size));
  for (std::int64_t ch = 0; ch < 2; ++ch) {
    std::fill(acc.begin(), acc.end(), 0.0);
    std::fill(cover.begin(), cover.end(), 0.0);
    for (std::int64_t t = 0; t < frames; ++t) {
      for (std::int64_t f = 0; f < bins; ++f) {
        re[static_cast<std::size_t>(f)] =
            in[f * f_stride + t * t_stride + 2 * ch];
        im[static_cast<std::size_t>(f)] =
            in[f * f_stride + t * t_stride + 2 * ch + 1];
      }
      fft::irdft(re.data(), im.data(), static_cast<std::size_t>(cfg.fft_size),
                 frame.data());
      const std::int64_t base = t * cfg.hop;
      for (std::int64_t j = 0; j < cfg.fft_size; ++j) {
        const std::int64_t p = base + j;
        if (p >= fr.padded_len) break;
        acc[static_cast<std::size_t>(p)] += frame[static_cast<std::size_t>(j)];
        cover[static_cast<std::size_t>(p)] += 1.0;
      }
    }
    auto& dst = audio.samples[static_cast<std::size_t>(ch)];
    for (std::int64_t s = 0; s < length; ++s) {
      const std::int64_t p = s + fr.left_pad;
      if (p < fr.padded_len && cover[static_cast<std::size_t>(p)] > 0.0)
        dst[static_cast<std::size_t>(s)] =
            acc[static_cast<std::size_t>(p)] / cover[static_cast<std::size_t>(p)];
    }
    check_finite(dst, "istft");
  }
  return audio;
}

}  // namespace scnet
