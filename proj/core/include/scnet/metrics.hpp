#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scnet/model.hpp"
#include "scnet/spectral.hpp"

namespace scnet {

struct SdrValue {
  double db = 0.0;  // NaN when silent_reference
  bool silent_reference = false;
};

// 10*log10(sum(ref^2) / sum((ref-est)^2)), capped at +100 dB. A silent
// reference has no defined ratio and is flagged instead.
SdrValue sdr(const AudioBuffer& ref, const AudioBuffer& est);

struct SdrChunks {
  std::vector<double> chunk_db;  // scored chunks only
  double median_db = 0.0;
  std::int64_t total_chunks = 0;
  std::int64_t silent_chunks = 0;  // excluded from the median
};

// Scores non-overlapping chunks (default 1 s) and reports their median;
// throws NumericError when every chunk has a silent reference.
SdrChunks chunked_median_sdr(const AudioBuffer& ref, const AudioBuffer& est,
                             double chunk_seconds = 1.0);

struct SdrReport {
  double chunk_seconds = 1.0;
  std::vector<std::pair<std::string, SdrChunks>> sources;
  double mean_of_medians = 0.0;
};

SdrReport sdr_report(const std::vector<std::string>& names,
                     const std::vector<AudioBuffer>& refs,
                     const std::vector<AudioBuffer>& ests,
                     double chunk_seconds = 1.0);

struct RtfReport {
  double processing_seconds = 0.0;  // median over timed repetitions
  double audio_seconds = 0.0;
  double rtf = 0.0;
  int repetitions = 0;
  int warmup = 0;
};

// Times the full separation path (stft, forward, istft per source) on a
// deterministic noise clip; single-threaded, median over >= 3 repetitions
// after >= 1 warm-up run.
RtfReport measure_rtf(const Model& model, double seconds, int repetitions,
                      int warmup, int sample_rate = 44100);

}  // namespace scnet
