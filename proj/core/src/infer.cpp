#include "scnet/infer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "scnet/errors.hpp"
#include "scnet/ops.hpp"

namespace scnet {

std::vector<AudioBuffer> separate_clip(const Model& model, const AudioBuffer& audio) {
  audio.validate();
  const ModelConfig& cfg = model.config();
  ComplexSpectrogram spec = stft(audio, cfg.stft);
  TensorPtr input =
      reshape(spec.data, {1, spec.bins(), spec.frames(), spec.features()});
  std::vector<TensorPtr> outs = model.forward(input);

  std::vector<AudioBuffer> stems;
  stems.reserve(outs.size());
  for (TensorPtr& out : outs) {
    ComplexSpectrogram s;
    s.data = reshape(out, {out->dim(1), out->dim(2), out->dim(3)});
    s.source_length = audio.length();
    s.fft_size = cfg.stft.fft_size;
    s.hop = cfg.stft.hop;
    s.sample_rate = audio.sample_rate;
    AudioBuffer stem = istft(s, cfg.stft, audio.length());
    if (audio.channels() == 1) {
      // the model always works on a stereo pair; fold back to mono
      std::vector<double>& left = stem.samples[0];
      const std::vector<double>& right = stem.samples[1];
      for (std::size_t i = 0; i < left.size(); ++i)
        left[i] = 0.5 * (left[i] + right[i]);
      stem.samples.resize(1);
    }
    stems.push_back(std::move(stem));
  }
  return stems;
}

std::vector<double> crossfade_stitch(const std::vector<std::vector<double>>& windows,
                                     std::int64_t hop, std::int64_t total_len) {
  if (windows.empty()) throw DimensionError("crossfade_stitch: no windows");
  if (hop <= 0) throw DimensionError("crossfade_stitch: hop must be positive");
  if (total_len < 0) throw DimensionError("crossfade_stitch: negative length");
  const std::int64_t win = static_cast<std::int64_t>(windows[0].size());
  for (const std::vector<double>& w : windows)
    if (static_cast<std::int64_t>(w.size()) != win)
      throw ShapeError("crossfade_stitch: windows differ in length");
  if (win <= 0) throw DimensionError("crossfade_stitch: empty window");
  const std::int64_t fade = win - hop;
  if (fade < 0) throw DimensionError("crossfade_stitch: hop exceeds window length");
  if (fade > hop)
    throw DimensionError(
        "crossfade_stitch: overlap beyond half a window would triple-cover samples");

  // Complementary linear ramps over each overlap region: the entering window
  // gets (i+1)/(fade+1) at local offset i, the leaving one (win-i)/(fade+1),
  // so their sum is exactly one everywhere.
  std::vector<double> out(static_cast<std::size_t>(total_len), 0.0);
  std::vector<double> wsum(static_cast<std::size_t>(total_len), 0.0);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const std::int64_t start = static_cast<std::int64_t>(k) * hop;
    for (std::int64_t i = 0; i < win; ++i) {
      const std::int64_t g = start + i;
      if (g >= total_len) break;
      double w = 1.0;
      if (k > 0 && i < fade)
        w = static_cast<double>(i + 1) / static_cast<double>(fade + 1);
      else if (k + 1 < windows.size() && i >= win - fade)
        w = static_cast<double>(win - i) / static_cast<double>(fade + 1);
      out[static_cast<std::size_t>(g)] += w * windows[k][static_cast<std::size_t>(i)];
      wsum[static_cast<std::size_t>(g)] += w;
    }
  }
  for (std::int64_t g = 0; g < total_len; ++g) {
    const double s = wsum[static_cast<std::size_t>(g)];
    if (s <= 0.0)
      throw DimensionError("crossfade_stitch: sample not covered by any window");
    out[static_cast<std::size_t>(g)] /= s;
  }
  return out;
}

void ChunkingConfig::validate() const {
  if (!(window_seconds > 0.0))
    throw ConfigError("chunking.window_seconds must be positive");
  if (!(overlap >= 0.0) || !(overlap <= 0.5))
    throw ConfigError("chunking.overlap must lie in [0, 0.5]");
}

std::vector<AudioBuffer> separate_long(const Model& model, const AudioBuffer& audio,
                                       const ChunkingConfig& cfg) {
  cfg.validate();
  audio.validate();
  const std::int64_t total = audio.length();
  const int sr = audio.sample_rate;
  const std::int64_t win = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(cfg.window_seconds * sr)));
  const std::int64_t hop = std::max<std::int64_t>(
      1, win - static_cast<std::int64_t>(std::llround(cfg.overlap * static_cast<double>(win))));

  std::vector<std::int64_t> starts{0};
  while (starts.back() + win < total) starts.push_back(starts.back() + hop);

  const std::size_t n_src = model.config().sources.size();
  const std::size_t n_ch = static_cast<std::size_t>(audio.channels());
  std::vector<std::vector<std::vector<std::vector<double>>>> pieces(
      n_src, std::vector<std::vector<std::vector<double>>>(n_ch));

  for (std::int64_t start : starts) {
    AudioBuffer clip;
    clip.sample_rate = sr;
    clip.samples.resize(n_ch);
    for (std::size_t ch = 0; ch < n_ch; ++ch) {
      std::vector<double>& dst = clip.samples[ch];
      dst.assign(static_cast<std::size_t>(win), 0.0);
      const std::vector<double>& src = audio.samples[ch];
      const std::int64_t avail = std::min(win, total - start);
      for (std::int64_t i = 0; i < avail; ++i)
        dst[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(start + i)];
    }
    std::vector<AudioBuffer> stems = separate_clip(model, clip);
    for (std::size_t s = 0; s < n_src; ++s)
      for (std::size_t ch = 0; ch < n_ch; ++ch)
        pieces[s][ch].push_back(std::move(stems[s].samples[ch]));
  }

  std::vector<AudioBuffer> out(n_src);
  for (std::size_t s = 0; s < n_src; ++s) {
    out[s].sample_rate = sr;
    out[s].samples.resize(n_ch);
    for (std::size_t ch = 0; ch < n_ch; ++ch)
      out[s].samples[ch] = crossfade_stitch(pieces[s][ch], hop, total);
  }
  return out;
}

}  // namespace scnet
