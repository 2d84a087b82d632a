#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace scnet {

// How to split a frequency axis into low/mid/high bands and how hard to
// compress each one.
struct BandSplitSpec {
  std::array<double, 3> proportions{0.175, 0.392, 0.433};
  std::array<int, 3> strides{1, 4, 16};

  void validate() const;  // throws ConfigError naming the offending field
};

struct BandExtent {
  std::int64_t start = 0;
  std::int64_t width = 0;
  std::int64_t right_pad = 0;
  std::int64_t out_width = 0;
};

struct BandPlan {
  std::int64_t input_width = 0;
  std::array<BandExtent, 3> bands;
  std::int64_t total_out_width = 0;
  double retention = 0.0;  // total_out_width / input_width
};

struct CompressionReport {
  double gcr = 0.0;
  std::vector<std::int64_t> cascade;  // F before each block, then the final F
};

// Splits [0, f_in) into three contiguous bands: floor(p_low * F),
// floor(p_mid * F), remainder. Each band is right-padded up to a stride
// multiple; out_width = ceil(width / stride).
BandPlan plan(std::int64_t f_in, const BandSplitSpec& spec);

// Idealized, rounding-free global compression ratio: 1 - sum(p_i / s_i).
double global_compression(const BandSplitSpec& spec);

// Applies `plan` n_blocks times with the same proportions, recording the
// frequency width before each application and after the last.
CompressionReport cascade(std::int64_t f0, const BandSplitSpec& spec,
                          int n_blocks);

}  // namespace scnet
