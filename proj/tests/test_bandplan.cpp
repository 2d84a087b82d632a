#include <cmath>

#include "doctest.h"
#include "scnet/bandplan.hpp"
#include "scnet/errors.hpp"
#include "scnet/rng.hpp"

using namespace scnet;

TEST_CASE("default split of 2049 bins") {
  BandSplitSpec spec;  // 17.5 / 39.2 / 43.3 with strides 1/4/16
  auto p = plan(2049, spec);
  CHECK(p.bands[0].width == 358);
  CHECK(p.bands[1].width == 803);
  CHECK(p.bands[2].width == 888);
  CHECK(p.bands[0].out_width == 358);
  CHECK(p.bands[1].out_width == 201);
  CHECK(p.bands[2].out_width == 56);
  CHECK(p.total_out_width == 615);
  CHECK(p.bands[0].start == 0);
  CHECK(p.bands[1].start == 358);
  CHECK(p.bands[2].start == 358 + 803);
  CHECK(p.retention == doctest::Approx(615.0 / 2049.0));
}

TEST_CASE("small plan with exact thirds") {
  BandSplitSpec spec;
  spec.proportions = {0.25, 0.25, 0.5};
  auto p = plan(16, spec);
  CHECK(p.bands[0].width == 4);
  CHECK(p.bands[1].width == 4);
  CHECK(p.bands[2].width == 8);
  CHECK(p.bands[0].out_width == 4);
  CHECK(p.bands[1].out_width == 1);
  CHECK(p.bands[2].out_width == 1);
  CHECK(p.total_out_width == 6);
  CHECK(p.bands[1].right_pad == 0);
  CHECK(p.bands[2].right_pad == 8);
}

TEST_CASE("identity strides keep every bin") {
  BandSplitSpec spec;
  spec.strides = {1, 1, 1};
  auto p = plan(100, spec);
  CHECK(p.total_out_width == 100);
  CHECK(p.retention == 1.0);
}

TEST_CASE("bands tile the axis for arbitrary widths") {
  RngState rng(29);
  BandSplitSpec spec;
  for (int i = 0; i < 100; ++i) {
    const auto f = static_cast<std::int64_t>(16 + rng.below(4000));
    auto p = plan(f, spec);
    std::int64_t covered = 0;
    for (std::size_t bi = 0; bi < 3; ++bi) {
      const auto& b = p.bands[bi];
      const std::int64_t s = spec.strides[bi];
      CHECK(b.start == covered);
      covered += b.width;
      CHECK(b.out_width == (b.width + s - 1) / s);
      CHECK((b.width + b.right_pad) % s == 0);
    }
    CHECK(covered == f);
  }
}

TEST_CASE("stated compression ratios match the published table") {
  auto gcr = [](double a, double b, double c) {
    BandSplitSpec s;
    s.proportions = {a, b, c};
    return global_compression(s);
  };
  CHECK(std::abs(gcr(0.100, 0.233, 0.667) - 0.80) <= 0.005);
  CHECK(std::abs(gcr(0.150, 0.250, 0.600) - 0.75) <= 0.005);
  CHECK(std::abs(gcr(0.100, 0.767, 0.133) - 0.70) <= 0.005);
  CHECK(std::abs(gcr(0.125, 0.642, 0.233) - 0.70) <= 0.005);
  CHECK(std::abs(gcr(0.150, 0.517, 0.333) - 0.70) <= 0.005);
  CHECK(std::abs(gcr(0.175, 0.392, 0.433) - 0.70) <= 0.005);
  CHECK(std::abs(gcr(0.200, 0.267, 0.533) - 0.70) <= 0.005);

  BandSplitSpec uniform;
  uniform.proportions = {0.3, 0.3, 0.4};
  uniform.strides = {4, 4, 4};
  CHECK(global_compression(uniform) == doctest::Approx(0.75));
}

TEST_CASE("plan retention tracks the ideal ratio for wide inputs") {
  BandSplitSpec spec;
  const double ideal = 1.0 - global_compression(spec);
  RngState rng(37);
  for (int i = 0; i < 50; ++i) {
    const auto f = static_cast<std::int64_t>(64 + rng.below(8000));
    auto p = plan(f, spec);
    CHECK(std::abs(p.retention - ideal) <= 0.02);
  }
}

TEST_CASE("three-block cascade from 2049") {
  BandSplitSpec spec;
  auto r = cascade(2049, spec, 3);
  REQUIRE(r.cascade.size() == 4);
  CHECK(r.cascade[0] == 2049);
  CHECK(r.cascade[1] == 615);
  CHECK(r.cascade[2] == 185);
  CHECK(r.cascade[3] == 56);
  CHECK(r.gcr == doctest::Approx(0.6999375));

  auto one = cascade(2049, spec, 1);
  CHECK(one.cascade.back() == plan(2049, spec).total_out_width);

  BandSplitSpec keep;
  keep.strides = {1, 1, 1};
  auto flat = cascade(512, keep, 4);
  for (auto f : flat.cascade) CHECK(f == 512);
}

TEST_CASE("invalid specs are rejected with the field named") {
  BandSplitSpec bad;
  bad.proportions = {0.5, 0.6, -0.1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_WITH_AS(plan(2049, bad), doctest::Contains("proportions"),
                       ConfigError);

  BandSplitSpec sum_off;
  sum_off.proportions = {0.3, 0.3, 0.3};
  CHECK_THROWS_AS(sum_off.validate(), ConfigError);

  BandSplitSpec zero_stride;
  zero_stride.strides = {0, 4, 16};
  CHECK_THROWS_WITH_AS(plan(2049, zero_stride), doctest::Contains("strides"),
                       ConfigError);

  // tiny width leaves the low band empty
  BandSplitSpec spec;
  spec.proportions = {0.01, 0.5, 0.49};
  CHECK_THROWS_AS(plan(16, spec), ConfigError);
  CHECK_THROWS_AS(plan(2, spec), ConfigError);
}
