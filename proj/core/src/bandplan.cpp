#include "scnet/bandplan.hpp"

#include <cmath>
#include <string>

#include "scnet/errors.hpp"

namespace scnet {

void BandSplitSpec::validate() const {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (proportions[static_cast<std::size_t>(i)] < 0.0)
      throw ConfigError("proportions[" + std::to_string(i) +
                        "] must be non-negative");
    sum += proportions[static_cast<std::size_t>(i)];
    if (strides[static_cast<std::size_t>(i)] < 1)
      throw ConfigError("strides[" + std::to_string(i) + "] must be >= 1");
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("proportions must sum to 1, got " + std::to_string(sum));
}

BandPlan plan(std::int64_t f_in, const BandSplitSpec& spec) {
  spec.validate();
  if (f_in < 3)
    throw ConfigError("input_width must be >= 3, got " + std::to_string(f_in));

  BandPlan p;
  p.input_width = f_in;
  const auto w_low = static_cast<std::int64_t>(
      std::floor(spec.proportions[0] * static_cast<double>(f_in)));
  const auto w_mid = static_cast<std::int64_t>(
      std::floor(spec.proportions[1] * static_cast<double>(f_in)));
  const std::int64_t w_high = f_in - w_low - w_mid;
  const std::int64_t widths[3] = {w_low, w_mid, w_high};

  std::int64_t start = 0;
  p.total_out_width = 0;
  for (int i = 0; i < 3; ++i) {
    const std::int64_t w = widths[i];
    if (w < 1)
      throw ConfigError("proportions[" + std::to_string(i) +
                        "] leaves band " + std::to_string(i) + " empty at width " +
                        std::to_string(f_in));
    const std::int64_t s = spec.strides[static_cast<std::size_t>(i)];
    BandExtent& b = p.bands[static_cast<std::size_t>(i)];
    b.start = start;
    b.width = w;
    b.right_pad = (s - w % s) % s;
    b.out_width = (w + b.right_pad) / s;
    start += w;
    p.total_out_width += b.out_width;
  }
  p.retention =
      static_cast<double>(p.total_out_width) / static_cast<double>(f_in);
  return p;
}

double global_compression(const BandSplitSpec& spec) {
  spec.validate();
  double kept = 0.0;
  for (int i = 0; i < 3; ++i)
    kept += spec.proportions[static_cast<std::size_t>(i)] /
            static_cast<double>(spec.strides[static_cast<std::size_t>(i)]);
  return 1.0 - kept;
}

CompressionReport cascade(std::int64_t f0, const BandSplitSpec& spec,
                          int n_blocks) {
  if (n_blocks < 1)
    throw ConfigError("n_blocks must be >= 1, got " + std::to_string(n_blocks));
  CompressionReport r;
  r.gcr = global_compression(spec);
  r.cascade.push_back(f0);
  std::int64_t f = f0;
  for (int i = 0; i < n_blocks; ++i) {
    f = plan(f, spec).total_out_width;
    r.cascade.push_back(f);
  }
  return r;
}

}  // namespace scnet
