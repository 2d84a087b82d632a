#include <cmath>
#include <vector>

#include "doctest.h"
#include "scnet/gradcheck.hpp"
#include "scnet/model.hpp"
#include "scnet/ops.hpp"
#include "scnet/rng.hpp"

using namespace scnet;

namespace {

// fft 30/hop 10 -> 16 bins; cascade 16 -> 9 -> 5 -> 3 at strides 1/2/4.
ModelConfig toy_config() {
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

TensorPtr rand_spec(const ModelConfig& cfg, std::int64_t t, RngState& rng) {
  auto x = Tensor::create({1, cfg.stft.bins(), t, cfg.in_channels});
  for (double& v : x->data) v = rng.uniform(-0.5, 0.5);
  return x;
}

}  // namespace

TEST_CASE("parameter store tracks names, order, and counts") {
  ParamStore store;
  auto a = store.create("a", {2, 3}, ParamStore::Init::weight);
  auto b = store.create("b.c", {4}, ParamStore::Init::bias);
  CHECK(store.total_params() == 10);
  CHECK(store.find("a") == a);
  CHECK(store.find("missing") == nullptr);
  CHECK(store.entries()[0].first == "a");
  CHECK(store.entries()[1].first == "b.c");
  CHECK_THROWS_AS(store.create("a", {1}, ParamStore::Init::bias), ConfigError);

  store.set_requires_grad(true);
  CHECK(a->requires_grad);
  CHECK(b->requires_grad);

  RngState rng(3);
  store.init_values(rng);
  const double bound = std::sqrt(1.0 / 2.0);
  for (double v : a->data) {
    CHECK(std::abs(v) <= bound);
  }
  bool any_nonzero = false;
  for (double v : a->data) any_nonzero = any_nonzero || v != 0.0;
  CHECK(any_nonzero);
  for (double v : b->data) CHECK(v == 0.0);
}

TEST_CASE("analytic parameter count matches a hand count on the toy config") {
  auto rep = param_count(toy_config());
  CHECK(rep.total == 36312);
  std::int64_t sum = 0;
  for (const auto& row : rep.rows) sum += row.count;
  CHECK(sum == rep.total);
}

TEST_CASE("analytic parameter count matches the instantiated store") {
  for (bool defaults : {false, true}) {
    ModelConfig cfg = defaults ? ModelConfig{} : toy_config();
    Model model(cfg);
    auto rep = param_count(cfg);
    CHECK(rep.total == model.params().total_params());
  }
}

TEST_CASE("parameter count grows with the channel ladder") {
  ModelConfig small;  // defaults
  ModelConfig big = small;
  big.channel_ladder = {48, 96, 192};
  big.dual_path.channels = 192;
  CHECK(param_count(big).total > param_count(small).total);
}

TEST_CASE("default configuration lands near ten million parameters") {
  auto rep = param_count(ModelConfig{});
  CHECK(rep.total == 9540438);  // reported against the 10.08M reference point
  CHECK(rep.total > 0.75 * 10.08e6);
  CHECK(rep.total < 1.25 * 10.08e6);
}

TEST_CASE("model forward emits one spectrogram per source") {
  ModelConfig cfg = toy_config();
  Model model(cfg);
  RngState rng(11);
  model.init(rng);

  auto x = rand_spec(cfg, 4, rng);
  auto outs = model.forward(x);
  REQUIRE(outs.size() == 2);
  for (const auto& o : outs) {
    CHECK(o->shape == Shape{1, 16, 4, 4});
    for (double v : o->data) CHECK(std::isfinite(v));
  }

  SUBCASE("same seed reproduces outputs bit-exactly") {
    Model again(cfg);
    RngState rng2(11);
    again.init(rng2);
    auto x2 = Tensor::from_data(x->shape, x->data);
    auto outs2 = again.forward(x2);
    for (std::size_t s = 0; s < outs.size(); ++s) {
      for (std::int64_t i = 0; i < outs[s]->numel(); ++i) {
        CHECK(outs[s]->data[i] == outs2[s]->data[i]);
      }
    }
  }
}

TEST_CASE("model forward validates the input spectrogram") {
  Model model(toy_config());
  RngState rng(12);
  model.init(rng);
  CHECK_THROWS_AS(model.forward(Tensor::zeros({1, 17, 4, 4})), ShapeError);
  CHECK_THROWS_AS(model.forward(Tensor::zeros({16, 4, 4})), ShapeError);
}

TEST_CASE("model config cross-field validation names the offending field") {
  ModelConfig cfg = toy_config();
  cfg.dual_path.channels = 16;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("dual_path.channels"),
                       ConfigError);

  cfg = toy_config();
  cfg.features_per_source = 2;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("features_per_source"),
                       ConfigError);

  // 9 bins collapse to an empty low band on the second cascade level.
  cfg = toy_config();
  cfg.stft.fft_size = 16;
  cfg.stft.hop = 8;
  cfg.bands.proportions = {0.175, 0.392, 0.433};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("full toy model gradients match finite differences") {
  ModelConfig cfg = toy_config();
  Model model(cfg);
  RngState rng(13);
  model.init(rng);
  model.params().set_requires_grad(true);

  auto x = rand_spec(cfg, 4, rng);
  x->requires_grad = true;
  std::vector<TensorPtr> inputs = {x};
  for (const auto& [name, t] : model.params().entries()) inputs.push_back(t);

  GradCheckOptions opts;
  opts.max_coords_per_input = 4;
  auto res = grad_check(
      [&] {
        auto outs = model.forward(x);
        TensorPtr acc = mean_all(outs[0]);
        for (std::size_t i = 1; i < outs.size(); ++i)
          acc = add(acc, mean_all(outs[i]));
        return acc;
      },
      inputs, opts);
  INFO(res.worst_where, " rel err ", res.worst);
  CHECK(res.ok);
  CHECK(res.worst <= 1e-3);
}
