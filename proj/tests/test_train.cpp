#include <algorithm>
#include <limits>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "scnet/gradcheck.hpp"
#include "scnet/model.hpp"
#include "scnet/rng.hpp"
#include "scnet/train.hpp"

using namespace scnet;

namespace {

TensorPtr rand_tensor(Shape shape, RngState& rng, double lo = -1.0, double hi = 1.0) {
  auto t = Tensor::create(std::move(shape));
  for (double& v : t->data) v = rng.uniform(lo, hi);
  return t;
}

AudioBuffer sine_buffer(double freq, double amp, double seconds, int sr,
                        double phase = 0.0) {
  AudioBuffer b;
  b.sample_rate = sr;
  const auto n = static_cast<std::size_t>(std::llround(seconds * sr));
  b.samples.assign(2, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    b.samples[0][i] = amp * std::sin(2.0 * 3.14159265358979323846 * freq * t + phase);
    b.samples[1][i] = amp * std::cos(2.0 * 3.14159265358979323846 * freq * t + phase);
  }
  return b;
}

StemSet two_stem_track(double seconds, int sr, double f1 = 40.0, double f2 = 150.0) {
  StemSet set;
  set.names = {"left", "right"};
  set.stems = {sine_buffer(f1, 0.6, seconds, sr), sine_buffer(f2, 0.4, seconds, sr)};
  set.mixture = set.stems[0];
  for (std::size_t ch = 0; ch < 2; ++ch)
    for (std::size_t i = 0; i < set.mixture.samples[ch].size(); ++i)
      set.mixture.samples[ch][i] += set.stems[1].samples[ch][i];
  return set;
}

ModelConfig tiny_model_config() {
  ModelConfig cfg;
  cfg.stft.fft_size = 30;
  cfg.stft.hop = 10;
  cfg.bands.proportions = {0.25, 0.375, 0.375};
  cfg.bands.strides = {1, 2, 4};
  cfg.channel_ladder = {8, 16, 32};
  cfg.conv_module_counts = {0, 0, 0};
  cfg.dual_path.n_layers = 2;
  cfg.dual_path.channels = 32;
  cfg.dual_path.hidden_odd = 4;
  cfg.dual_path.hidden_even = 8;
  cfg.sources = {"left", "right"};
  return cfg;
}

}  // namespace

TEST_CASE("rmse loss sits at the epsilon floor when estimates are exact") {
  RngState rng(81);
  auto a = rand_tensor({1, 3, 2, 4}, rng);
  auto b = rand_tensor({1, 3, 2, 4}, rng);
  auto loss = rmse_loss({a, b}, {a, b});
  CHECK(loss->value() > 0.0);
  CHECK(loss->value() <= 1e-4);
}

TEST_CASE("rmse loss of a unit imaginary offset is one") {
  RngState rng(82);
  auto ref1 = rand_tensor({2, 3, 2, 4}, rng);
  auto ref2 = rand_tensor({2, 3, 2, 4}, rng);
  auto est1 = Tensor::from_data(ref1->shape, ref1->data);
  auto est2 = Tensor::from_data(ref2->shape, ref2->data);
  for (std::int64_t i = 1; i < est1->numel(); i += 2) est1->data[i] += 1.0;
  for (std::int64_t i = 1; i < est2->numel(); i += 2) est2->data[i] += 1.0;
  auto loss = rmse_loss({est1, est2}, {ref1, ref2});
  CHECK(loss->value() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("rmse loss matches a direct elementwise computation") {
  RngState rng(83);
  std::vector<TensorPtr> est = {rand_tensor({2, 3, 1, 4}, rng),
                                rand_tensor({2, 3, 1, 4}, rng)};
  std::vector<TensorPtr> ref = {rand_tensor({2, 3, 1, 4}, rng),
                                rand_tensor({2, 3, 1, 4}, rng)};
  double total = 0.0;
  std::int64_t pairs = 0;
  for (int s = 0; s < 2; ++s) {
    for (std::int64_t i = 0; i + 1 < est[s]->numel(); i += 2) {
      const double dr = est[s]->data[i] - ref[s]->data[i];
      const double di = est[s]->data[i + 1] - ref[s]->data[i + 1];
      total += std::sqrt(dr * dr + di * di + 1e-8);
      pairs += 1;
    }
  }
  auto loss = rmse_loss(est, ref);
  CHECK(loss->value() == doctest::Approx(total / pairs).epsilon(1e-12));

  SUBCASE("permuting sources in both lists leaves the loss unchanged") {
    auto swapped = rmse_loss({est[1], est[0]}, {ref[1], ref[0]});
    CHECK(swapped->value() == doctest::Approx(loss->value()).epsilon(1e-15));
  }
}

TEST_CASE("rmse loss rejects mismatched inputs") {
  RngState rng(84);
  auto a = rand_tensor({1, 2, 2, 4}, rng);
  auto b = rand_tensor({1, 2, 2, 2}, rng);
  CHECK_THROWS_AS(rmse_loss({a}, {b}), ShapeError);
  CHECK_THROWS_AS(rmse_loss({a, a}, {a}), ShapeError);
  CHECK_THROWS_AS(rmse_loss({}, {}), ShapeError);
}

TEST_CASE("rmse loss gradients match finite differences") {
  RngState rng(85);
  std::vector<TensorPtr> est = {rand_tensor({1, 3, 2, 4}, rng),
                                rand_tensor({1, 3, 2, 4}, rng)};
  std::vector<TensorPtr> ref = {rand_tensor({1, 3, 2, 4}, rng),
                                rand_tensor({1, 3, 2, 4}, rng)};
  std::vector<TensorPtr> inputs;
  inputs.insert(inputs.end(), est.begin(), est.end());
  inputs.insert(inputs.end(), ref.begin(), ref.end());
  for (auto& t : inputs) t->requires_grad = true;
  auto res = grad_check([&] { return rmse_loss(est, ref); }, inputs);
  INFO(res.worst_where, " rel err ", res.worst);
  CHECK(res.ok);
  CHECK(res.worst <= 1e-3);
}

TEST_CASE("segment spans follow the hop arithmetic") {
  TrainConfig cfg;  // 11 s segments, 1 s hop
  const int sr = 1000;

  auto spans = segment(30 * sr, sr, cfg);
  REQUIRE(spans.size() == 20);
  CHECK(spans.front().start == 0);
  CHECK(spans.back().start == 19 * sr);
  for (const auto& s : spans) CHECK(s.length == 11 * sr);

  CHECK(segment(11 * sr, sr, cfg).size() == 1);

  TrainConfig tiling = cfg;
  tiling.segment_seconds = 2.0;
  tiling.segment_hop_seconds = 2.0;
  auto tiles = segment(6 * sr, sr, tiling);
  REQUIRE(tiles.size() == 3);
  CHECK(tiles[1].start == 2 * sr);
  CHECK(tiles[2].start == 4 * sr);

  auto padded = segment(5 * sr, sr, cfg);  // shorter than one segment
  REQUIRE(padded.size() == 1);
  CHECK(padded[0].start == 0);
  CHECK(padded[0].length == 11 * sr);
}

TEST_CASE("segment extraction copies values and zero-pads the tail") {
  const int sr = 100;
  auto track = two_stem_track(0.5, sr);  // 50 samples
  SegmentSpan span{20, 40};              // 10 samples of padding
  auto seg = extract_segment(track, span);
  CHECK(seg.names == track.names);
  REQUIRE(seg.mixture.length() == 40);
  for (int ch = 0; ch < 2; ++ch) {
    for (int i = 0; i < 30; ++i)
      CHECK(seg.mixture.samples[ch][i] == track.mixture.samples[ch][20 + i]);
    for (int i = 30; i < 40; ++i) CHECK(seg.mixture.samples[ch][i] == 0.0);
  }
  CHECK(seg.validate());
  CHECK_THROWS_AS(extract_segment(track, SegmentSpan{60, 10}), DimensionError);
}

TEST_CASE("remix augmentation permutes stems per source and resums mixtures") {
  const int sr = 200;
  std::vector<StemSet> batch = {two_stem_track(0.2, sr, 10, 60),
                                two_stem_track(0.2, sr, 20, 70),
                                two_stem_track(0.2, sr, 30, 80)};
  RngState rng(86);
  auto mixed = augment_remix(batch, rng);
  REQUIRE(mixed.size() == 3);

  for (std::size_t s = 0; s < 2; ++s) {
    std::vector<double> before, after;
    for (std::size_t k = 0; k < 3; ++k) {
      before.push_back(batch[k].stems[s].samples[0][1]);
      after.push_back(mixed[k].stems[s].samples[0][1]);
    }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);  // a permutation of the same stems
  }
  for (const auto& set : mixed) {
    for (int ch = 0; ch < 2; ++ch) {
      for (std::size_t i = 0; i < set.mixture.samples[ch].size(); ++i) {
        CHECK(set.mixture.samples[ch][i] ==
              set.stems[0].samples[ch][i] + set.stems[1].samples[ch][i]);
      }
    }
  }

  SUBCASE("a batch of one is returned unchanged") {
    std::vector<StemSet> solo = {batch[0]};
    auto out = augment_remix(solo, rng);
    CHECK(out[0].stems[0].samples[0] == batch[0].stems[0].samples[0]);
  }

  SUBCASE("the permutation is seed-deterministic") {
    RngState r1(123), r2(123);
    auto m1 = augment_remix(batch, r1);
    auto m2 = augment_remix(batch, r2);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(m1[k].stems[0].samples[0] == m2[k].stems[0].samples[0]);
  }
}

TEST_CASE("scale augmentation draws independent gains inside the range") {
  const int sr = 50;
  StemSet flat;
  flat.names = {"left", "right"};
  AudioBuffer ones;
  ones.sample_rate = sr;
  ones.samples.assign(2, std::vector<double>(4, 1.0));
  flat.stems = {ones, ones};
  flat.mixture = ones;
  for (auto& ch : flat.mixture.samples)
    for (double& v : ch) v = 2.0;

  RngState rng(87);
  double lo_seen = 10.0, hi_seen = -10.0;
  int draws = 0;
  while (draws < 10000) {
    std::vector<StemSet> batch(25, flat);
    auto scaled = augment_scale(batch, rng, 0.25, 1.25);
    for (const auto& set : scaled) {
      for (const auto& stem : set.stems) {
        const double gain = stem.samples[0][0];
        CHECK(gain >= 0.25);
        CHECK(gain < 1.25);
        lo_seen = std::min(lo_seen, gain);
        hi_seen = std::max(hi_seen, gain);
        draws += 1;
      }
      for (int ch = 0; ch < 2; ++ch)
        CHECK(set.mixture.samples[ch][0] ==
              set.stems[0].samples[ch][0] + set.stems[1].samples[ch][0]);
    }
  }
  CHECK(lo_seen < 0.35);
  CHECK(hi_seen > 1.15);

  SUBCASE("a degenerate range is the identity") {
    std::vector<StemSet> batch = {flat};
    auto out = augment_scale(batch, rng, 1.0, 1.0);
    CHECK(out[0].stems[0].samples[0] == flat.stems[0].samples[0]);
    CHECK(out[0].mixture.samples[0] == flat.mixture.samples[0]);
  }
}

TEST_CASE("adam first step moves parameters by minus lr times the gradient sign") {
  ParamStore store;
  auto p = store.create("p", {3}, ParamStore::Init::bias);
  p->data = {1.0, -2.0, 0.5};
  p->ensure_grad();
  p->grad = {0.5, -2.0, 0.0};

  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.1;
  adam_step(store.entries(), state, cfg);
  CHECK(p->data[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
  CHECK(p->data[1] == doctest::Approx(-2.0 + 0.1).epsilon(1e-6));
  CHECK(p->data[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(state.step == 1);

  SUBCASE("an empty gradient leaves parameters untouched") {
    ParamStore s2;
    auto q = s2.create("q", {2}, ParamStore::Init::bias);
    q->data = {3.0, -4.0};
    AdamState st;
    adam_step(s2.entries(), st, cfg);
    CHECK(q->data[0] == 3.0);
    CHECK(q->data[1] == -4.0);
  }
}

TEST_CASE("toy training with zero learning rate repeats the same loss") {
  auto cfg = tiny_model_config();
  Model model(cfg);
  RngState init_rng(90);
  model.init(init_rng);

  TrainConfig tc;
  tc.segment_seconds = 0.5;
  tc.segment_hop_seconds = 0.5;
  tc.lr = 0.0;
  tc.batch_size = 1;
  tc.steps = 3;
  tc.seed = 7;
  tc.scale_min = tc.scale_max = 1.0;
  tc.remix = false;

  auto tracks = std::vector<StemSet>{two_stem_track(0.5, 500)};
  auto result = fit_toy(model, tracks, tc);
  REQUIRE(result.losses.size() == 3);
  CHECK(result.losses[1] == result.losses[0]);
  CHECK(result.losses[2] == result.losses[0]);
}

TEST_CASE("toy training is seed-deterministic and reduces the loss") {
  auto cfg = tiny_model_config();
  TrainConfig tc;
  tc.segment_seconds = 0.5;
  tc.segment_hop_seconds = 0.25;
  tc.lr = 2e-3;
  tc.batch_size = 2;
  tc.steps = 12;
  tc.seed = 21;

  auto tracks =
      std::vector<StemSet>{two_stem_track(1.0, 500), two_stem_track(1.0, 500, 25, 90)};

  Model m1(cfg), m2(cfg);
  RngState r1(5), r2(5);
  m1.init(r1);
  m2.init(r2);
  auto log1 = fit_toy(m1, tracks, tc);
  auto log2 = fit_toy(m2, tracks, tc);
  REQUIRE(log1.losses.size() == 12);
  for (std::size_t i = 0; i < log1.losses.size(); ++i)
    CHECK(log1.losses[i] == log2.losses[i]);

  const auto& params1 = m1.params().entries();
  const auto& params2 = m2.params().entries();
  for (std::size_t i = 0; i < params1.size(); ++i)
    CHECK(params1[i].second->data == params2[i].second->data);
}

TEST_CASE("toy training reduces the loss on a fixed batch") {
  auto cfg = tiny_model_config();
  Model model(cfg);
  RngState rng(92);
  model.init(rng);

  TrainConfig tc;  // one track, one span, no augmentation: the same batch each step
  tc.segment_seconds = 0.5;
  tc.segment_hop_seconds = 0.5;
  tc.lr = 2e-3;
  tc.batch_size = 1;
  tc.steps = 15;
  tc.seed = 3;
  tc.scale_min = tc.scale_max = 1.0;
  tc.remix = false;

  auto tracks = std::vector<StemSet>{two_stem_track(0.5, 500)};
  auto result = fit_toy(model, tracks, tc);
  REQUIRE(result.losses.size() == 15);
  CHECK(result.losses.back() < result.losses.front());
}

TEST_CASE("toy training aborts with a diagnostic when values blow up") {
  auto cfg = tiny_model_config();
  Model model(cfg);
  RngState rng(91);
  model.init(rng);
  model.params().entries()[0].second->data[0] =
      std::numeric_limits<double>::quiet_NaN();

  TrainConfig tc;
  tc.segment_seconds = 0.5;
  tc.segment_hop_seconds = 0.5;
  tc.steps = 2;
  auto tracks = std::vector<StemSet>{two_stem_track(0.5, 500)};
  CHECK_THROWS_WITH_AS(fit_toy(model, tracks, tc),
                       doctest::Contains("aborted at step"), NumericError);
}

TEST_CASE("stem sets flag inconsistent mixtures without throwing") {
  auto track = two_stem_track(0.1, 300);
  CHECK(track.validate());
  track.mixture.samples[0][3] += 0.5;
  CHECK_FALSE(track.validate());

  StemSet broken = track;
  broken.stems[0].samples[0].pop_back();
  CHECK_THROWS_AS(broken.validate(), Error);

  StemSet unnamed = track;
  unnamed.names.pop_back();
  CHECK_THROWS_AS(unnamed.validate(), ConfigError);
}

TEST_CASE("training config validation names the offending field") {
  TrainConfig tc;
  tc.segment_hop_seconds = 12.0;
  CHECK_THROWS_WITH_AS(tc.validate(), doctest::Contains("segment_hop_seconds"),
                       ConfigError);
  tc = TrainConfig{};
  tc.lr = -1.0;
  CHECK_THROWS_WITH_AS(tc.validate(), doctest::Contains("lr"), ConfigError);
  tc = TrainConfig{};
  tc.scale_min = 0.0;
  CHECK_THROWS_WITH_AS(tc.validate(), doctest::Contains("scale_min"), ConfigError);
}
