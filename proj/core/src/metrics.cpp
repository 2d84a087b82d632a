#include "scnet/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "scnet/errors.hpp"
#include "scnet/infer.hpp"
#include "scnet/rng.hpp"

namespace scnet {

namespace {

constexpr double kSdrCapDb = 100.0;

void check_pair(const AudioBuffer& ref, const AudioBuffer& est) {
  ref.validate();
  est.validate();
  if (ref.channels() != est.channels())
    throw ShapeError("sdr: channel counts differ (" + std::to_string(ref.channels()) +
                     " vs " + std::to_string(est.channels()) + ")");
  if (ref.length() != est.length())
    throw ShapeError("sdr: lengths differ (" + std::to_string(ref.length()) + " vs " +
                     std::to_string(est.length()) + ")");
  if (ref.sample_rate != est.sample_rate)
    throw ShapeError("sdr: sample rates differ (" + std::to_string(ref.sample_rate) +
                     " vs " + std::to_string(est.sample_rate) + ")");
}

// Energy ratio over [start, start+len) across all channels.
SdrValue span_sdr(const AudioBuffer& ref, const AudioBuffer& est, std::int64_t start,
                  std::int64_t len) {
  double num = 0.0;
  double den = 0.0;
  for (std::int64_t ch = 0; ch < ref.channels(); ++ch) {
    const std::vector<double>& r = ref.samples[static_cast<std::size_t>(ch)];
    const std::vector<double>& e = est.samples[static_cast<std::size_t>(ch)];
    for (std::int64_t i = start; i < start + len; ++i) {
      const double rv = r[static_cast<std::size_t>(i)];
      const double d = rv - e[static_cast<std::size_t>(i)];
      num += rv * rv;
      den += d * d;
    }
  }
  if (num == 0.0)
    return {std::numeric_limits<double>::quiet_NaN(), true};
  if (den == 0.0) return {kSdrCapDb, false};
  return {std::min(kSdrCapDb, 10.0 * std::log10(num / den)), false};
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

SdrValue sdr(const AudioBuffer& ref, const AudioBuffer& est) {
  check_pair(ref, est);
  return span_sdr(ref, est, 0, ref.length());
}

SdrChunks chunked_median_sdr(const AudioBuffer& ref, const AudioBuffer& est,
                             double chunk_seconds) {
  check_pair(ref, est);
  if (!(chunk_seconds > 0.0))
    throw ConfigError("chunk_seconds must be positive");
  const std::int64_t chunk = static_cast<std::int64_t>(
      std::floor(chunk_seconds * static_cast<double>(ref.sample_rate)));
  if (chunk <= 0)
    throw ConfigError("chunk_seconds shorter than one sample at this rate");
  const std::int64_t count = ref.length() / chunk;
  if (count == 0)
    throw DimensionError("chunked_median_sdr: audio shorter than one chunk (" +
                         std::to_string(ref.length()) + " < " + std::to_string(chunk) +
                         " samples)");

  SdrChunks out;
  out.total_chunks = count;
  for (std::int64_t k = 0; k < count; ++k) {
    const SdrValue v = span_sdr(ref, est, k * chunk, chunk);
    if (v.silent_reference)
      ++out.silent_chunks;
    else
      out.chunk_db.push_back(v.db);
  }
  if (out.chunk_db.empty())
    throw NumericError("chunked_median_sdr: every chunk has a silent reference");
  out.median_db = median_of(out.chunk_db);
  return out;
}

SdrReport sdr_report(const std::vector<std::string>& names,
                     const std::vector<AudioBuffer>& refs,
                     const std::vector<AudioBuffer>& ests, double chunk_seconds) {
  if (names.empty()) throw DimensionError("sdr_report: no sources");
  if (names.size() != refs.size() || names.size() != ests.size())
    throw ShapeError("sdr_report: names, references, and estimates must align");

  SdrReport report;
  report.chunk_seconds = chunk_seconds;
  double sum = 0.0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    SdrChunks chunks = chunked_median_sdr(refs[i], ests[i], chunk_seconds);
    sum += chunks.median_db;
    report.sources.emplace_back(names[i], std::move(chunks));
  }
  report.mean_of_medians = sum / static_cast<double>(names.size());
  return report;
}

RtfReport measure_rtf(const Model& model, double seconds, int repetitions, int warmup,
                      int sample_rate) {
  if (!(seconds > 0.0)) throw ConfigError("seconds must be positive");
  if (repetitions < 3) throw ConfigError("repetitions must be at least 3");
  if (warmup < 1) throw ConfigError("warmup must be at least 1");
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");

  const std::int64_t len = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(seconds * sample_rate)));
  RngState rng(0x9e3779b97f4a7c15ULL);
  AudioBuffer clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(2);
  for (std::vector<double>& ch : clip.samples) {
    ch.resize(static_cast<std::size_t>(len));
    for (double& s : ch) s = 0.1 * rng.normal();
  }

  for (int i = 0; i < warmup; ++i) separate_clip(model, clip);

  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(repetitions));
  for (int i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    separate_clip(model, clip);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }

  RtfReport report;
  report.processing_seconds = median_of(times);
  report.audio_seconds = static_cast<double>(len) / static_cast<double>(sample_rate);
  report.rtf = report.processing_seconds / report.audio_seconds;
  report.repetitions = repetitions;
  report.warmup = warmup;
  return report;
}

}  // namespace scnet
