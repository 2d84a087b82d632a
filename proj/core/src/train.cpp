#include "scnet/train.hpp"

#include <algorithm>
#include <cmath>

#include "scnet/ops.hpp"

namespace scnet {

bool StemSet::validate() const {
  if (stems.empty()) throw ConfigError("StemSet: no stems");
  if (names.size() != stems.size()) {
    throw ConfigError("StemSet: " + std::to_string(names.size()) + " names for " +
                      std::to_string(stems.size()) + " stems");
  }
  mixture.validate();
  for (std::size_t i = 0; i < stems.size(); ++i) {
    stems[i].validate();
    if (stems[i].sample_rate != mixture.sample_rate) {
      throw ConfigError("StemSet: stem " + names[i] + " sample rate " +
                        std::to_string(stems[i].sample_rate) + " != mixture " +
                        std::to_string(mixture.sample_rate));
    }
    if (stems[i].length() != mixture.length() ||
        stems[i].channels() != mixture.channels()) {
      throw ConfigError("StemSet: stem " + names[i] + " extent differs from mixture");
    }
  }

  double err2 = 0.0, ref2 = 0.0;
  for (std::int64_t ch = 0; ch < mixture.channels(); ++ch) {
    for (std::size_t i = 0; i < mixture.samples[ch].size(); ++i) {
      double sum = 0.0;
      for (const auto& stem : stems) sum += stem.samples[ch][i];
      const double d = sum - mixture.samples[ch][i];
      err2 += d * d;
      ref2 += mixture.samples[ch][i] * mixture.samples[ch][i];
    }
  }
  return err2 <= 1e-8 * std::max(ref2, 1e-12);
}

void remix_in_place(StemSet& set) {
  if (set.stems.empty()) throw ConfigError("StemSet: no stems");
  const AudioBuffer& first = set.stems[0];
  first.validate();
  for (const auto& stem : set.stems) {
    if (stem.sample_rate != first.sample_rate || stem.length() != first.length() ||
        stem.channels() != first.channels())
      throw ConfigError("StemSet: stems disagree in extent or sample rate");
  }
  set.mixture.sample_rate = first.sample_rate;
  set.mixture.samples.assign(static_cast<std::size_t>(first.channels()),
                             std::vector<double>(static_cast<std::size_t>(first.length()), 0.0));
  for (std::int64_t ch = 0; ch < set.mixture.channels(); ++ch) {
    auto& mix = set.mixture.samples[static_cast<std::size_t>(ch)];
    for (const auto& stem : set.stems) {
      for (std::size_t i = 0; i < mix.size(); ++i)
        mix[i] += stem.samples[static_cast<std::size_t>(ch)][i];
    }
  }
}

void TrainConfig::validate() const {
  if (segment_seconds <= 0) {
    throw ConfigError("TrainConfig.segment_seconds must be positive, got " +
                      std::to_string(segment_seconds));
  }
  if (segment_hop_seconds <= 0 || segment_hop_seconds > segment_seconds) {
    throw ConfigError("TrainConfig.segment_hop_seconds must lie in (0, segment_seconds], got " +
                      std::to_string(segment_hop_seconds));
  }
  if (lr < 0) {
    throw ConfigError("TrainConfig.lr must be non-negative, got " + std::to_string(lr));
  }
  if (batch_size < 1) {
    throw ConfigError("TrainConfig.batch_size must be at least 1, got " +
                      std::to_string(batch_size));
  }
  if (steps < 0) {
    throw ConfigError("TrainConfig.steps must be non-negative, got " +
                      std::to_string(steps));
  }
  if (scale_min <= 0 || scale_max < scale_min) {
    throw ConfigError("TrainConfig.scale_min/scale_max must satisfy 0 < min <= max, got " +
                      std::to_string(scale_min) + ".." + std::to_string(scale_max));
  }
}

std::vector<SegmentSpan> segment(std::int64_t track_samples, int sample_rate,
                                 const TrainConfig& cfg) {
  cfg.validate();
  if (track_samples < 0 || sample_rate <= 0) {
    throw ConfigError("segment: track length and sample rate must be positive");
  }
  const auto seg = static_cast<std::int64_t>(std::llround(cfg.segment_seconds * sample_rate));
  const auto hop =
      static_cast<std::int64_t>(std::llround(cfg.segment_hop_seconds * sample_rate));
  std::vector<SegmentSpan> spans;
  if (track_samples < seg) {
    spans.push_back({0, seg});  // zero-padded by extract_segment
    return spans;
  }
  const std::int64_t count = (track_samples - seg) / hop + 1;
  for (std::int64_t i = 0; i < count; ++i) spans.push_back({i * hop, seg});
  return spans;
}

namespace {

AudioBuffer slice_buffer(const AudioBuffer& in, const SegmentSpan& span) {
  AudioBuffer out;
  out.sample_rate = in.sample_rate;
  out.samples.resize(in.samples.size());
  for (std::size_t ch = 0; ch < in.samples.size(); ++ch) {
    out.samples[ch].assign(static_cast<std::size_t>(span.length), 0.0);
    const std::int64_t avail =
        std::min(span.length, in.length() - span.start);
    for (std::int64_t i = 0; i < avail; ++i)
      out.samples[ch][i] = in.samples[ch][span.start + i];
  }
  return out;
}

}  // namespace

StemSet extract_segment(const StemSet& track, const SegmentSpan& span) {
  if (span.start < 0 || span.length <= 0 || span.start >= track.mixture.length()) {
    throw DimensionError("extract_segment: span [" + std::to_string(span.start) + ", +" +
                         std::to_string(span.length) + ") outside track of " +
                         std::to_string(track.mixture.length()) + " samples");
  }
  StemSet out;
  out.names = track.names;
  out.mixture = slice_buffer(track.mixture, span);
  for (const auto& stem : track.stems) out.stems.push_back(slice_buffer(stem, span));
  return out;
}

std::vector<StemSet> augment_remix(const std::vector<StemSet>& batch, RngState& rng) {
  if (batch.size() <= 1) return batch;
  const std::size_t n_sources = batch[0].stems.size();
  for (const auto& set : batch) {
    if (set.stems.size() != n_sources || set.names != batch[0].names) {
      throw ConfigError("augment_remix: batch items disagree on stem names");
    }
  }
  std::vector<StemSet> out = batch;
  for (std::size_t s = 0; s < n_sources; ++s) {
    auto perm = rng.permutation(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
      out[k].stems[s] = batch[perm[k]].stems[s];
    }
  }
  for (auto& set : out) remix_in_place(set);
  return out;
}

std::vector<StemSet> augment_scale(const std::vector<StemSet>& batch, RngState& rng,
                                   double lo, double hi) {
  if (lo <= 0 || hi < lo) {
    throw ConfigError("augment_scale: gain range must satisfy 0 < lo <= hi, got " +
                      std::to_string(lo) + ".." + std::to_string(hi));
  }
  std::vector<StemSet> out = batch;
  for (auto& set : out) {
    for (auto& stem : set.stems) {
      const double gain = rng.uniform(lo, hi);
      for (auto& channel : stem.samples) {
        for (double& v : channel) v *= gain;
      }
    }
    remix_in_place(set);
  }
  return out;
}

void adam_step(const std::vector<std::pair<std::string, TensorPtr>>& params,
               AdamState& state, const AdamConfig& cfg) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].second->data.size(), 0.0);
      state.v[i].assign(params[i].second->data.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state tracks " +
                     std::to_string(state.m.size()) + " tensors, model has " +
                     std::to_string(params.size()));
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].second;
    if (state.m[i].size() != p.data.size()) {
      throw ShapeError("adam_step: state size mismatch on " + params[i].first);
    }
    const bool has_grad = !p.grad.empty();
    for (std::size_t j = 0; j < p.data.size(); ++j) {
      const double g = has_grad ? p.grad[j] : 0.0;
      state.m[i][j] = cfg.beta1 * state.m[i][j] + (1.0 - cfg.beta1) * g;
      state.v[i][j] = cfg.beta2 * state.v[i][j] + (1.0 - cfg.beta2) * g * g;
      const double mhat = state.m[i][j] / bc1;
      const double vhat = state.v[i][j] / bc2;
      p.data[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    check_finite(p.data, "adam_step");
  }
}

namespace {

TensorPtr stack_spectrograms(const std::vector<ComplexSpectrogram>& specs) {
  std::vector<TensorPtr> parts;
  for (const auto& s : specs) {
    parts.push_back(
        reshape(s.data, {1, s.bins(), s.frames(), s.features()}));
  }
  return parts.size() == 1 ? parts[0] : concat_axis(parts, 0);
}

}  // namespace

TrainResult fit_toy(Model& model, const std::vector<StemSet>& tracks,
                    const TrainConfig& cfg) {
  cfg.validate();
  if (tracks.empty()) throw ConfigError("fit_toy: no training tracks");
  const auto& sources = model.config().sources;
  for (const auto& track : tracks) {
    track.validate();
    if (track.names != sources) {
      std::string got;
      for (const auto& n : track.names) got += (got.empty() ? "" : ",") + n;
      throw ConfigError("fit_toy: track stems [" + got +
                        "] do not match the model's sources");
    }
    if (track.mixture.sample_rate != tracks[0].mixture.sample_rate) {
      throw ConfigError("fit_toy: tracks disagree on sample_rate");
    }
  }

  std::vector<std::vector<SegmentSpan>> spans;
  for (const auto& track : tracks) {
    spans.push_back(
        segment(track.mixture.length(), track.mixture.sample_rate, cfg));
  }

  RngState rng(cfg.seed);
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  TrainResult result;
  model.params().set_requires_grad(true);

  for (int step = 0; step < cfg.steps; ++step) {
    try {
      std::vector<StemSet> batch;
      for (int b = 0; b < cfg.batch_size; ++b) {
        const auto ti = static_cast<std::size_t>(rng.below(tracks.size()));
        const auto si = static_cast<std::size_t>(rng.below(spans[ti].size()));
        batch.push_back(extract_segment(tracks[ti], spans[ti][si]));
      }
      if (cfg.remix) batch = augment_remix(batch, rng);
      batch = augment_scale(batch, rng, cfg.scale_min, cfg.scale_max);

      std::vector<ComplexSpectrogram> mix_specs;
      for (const auto& item : batch)
        mix_specs.push_back(stft(item.mixture, model.config().stft));
      TensorPtr input = stack_spectrograms(mix_specs);

      std::vector<TensorPtr> refs;
      for (std::size_t s = 0; s < sources.size(); ++s) {
        std::vector<ComplexSpectrogram> stem_specs;
        for (const auto& item : batch)
          stem_specs.push_back(stft(item.stems[s], model.config().stft));
        refs.push_back(stack_spectrograms(stem_specs));
      }

      auto outs = model.forward(input);
      TensorPtr loss = rmse_loss(outs, refs);
      const double loss_value = loss->value();
      if (!std::isfinite(loss_value)) {
        throw NumericError("non-finite loss " + std::to_string(loss_value));
      }

      model.params().zero_grad();
      loss->backward();
      adam_step(model.params().entries(), result.adam, adam_cfg);
      result.losses.push_back(loss_value);
    } catch (const NumericError& e) {
      throw NumericError("fit_toy: aborted at step " + std::to_string(step) + " of " +
                         std::to_string(cfg.steps) + ": " + e.what());
    }
  }
  return result;
}

}  // namespace scnet
