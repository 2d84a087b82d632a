#include <benchmark/benchmark.h>

#include "scnet/fft.hpp"
#include "scnet/lstm.hpp"
#include "scnet/model.hpp"
#include "scnet/ops.hpp"
#include "scnet/rng.hpp"
#include "scnet/spectral.hpp"
#include "scnet/tensor.hpp"

namespace {

using namespace scnet;

TensorPtr noise_tensor(Shape shape, std::uint64_t seed) {
  RngState rng(seed);
  TensorPtr t = Tensor::create(std::move(shape));
  for (double& v : t->data) v = rng.normal();
  return t;
}

void BM_Conv1dStrided(benchmark::State& state) {
  const int stride = static_cast<int>(state.range(0));
  TensorPtr x = noise_tensor({1, 1024, 32}, 1);
  TensorPtr k = noise_tensor({4, 32, 64}, 2);
  for (auto _ : state) {
    TensorPtr y = conv1d_strided(x, k, stride, 0);
    benchmark::DoNotOptimize(y->data.data());
  }
}
BENCHMARK(BM_Conv1dStrided)->Arg(1)->Arg(4)->Arg(16);

void BM_Conv2dSame(benchmark::State& state) {
  TensorPtr x = noise_tensor({1, 64, 64, 16}, 3);
  TensorPtr k = noise_tensor({3, 3, 16, 16}, 4);
  for (auto _ : state) {
    TensorPtr y = conv2d_same(x, k);
    benchmark::DoNotOptimize(y->data.data());
  }
}
BENCHMARK(BM_Conv2dSame);

void BM_Bilstm(benchmark::State& state) {
  const std::int64_t len = state.range(0);
  const int channels = 32;
  const int hidden = 32;
  TensorPtr x = noise_tensor({1, len, channels}, 5);
  LstmParams params;
  for (LstmDirParams* dir : {&params.fwd, &params.bwd}) {
    dir->w_ih = noise_tensor({channels, 4 * hidden}, 6);
    dir->w_hh = noise_tensor({hidden, 4 * hidden}, 7);
    dir->bias = Tensor::zeros({4 * hidden});
  }
  for (auto _ : state) {
    TensorPtr y = bilstm(x, params, hidden);
    benchmark::DoNotOptimize(y->data.data());
  }
}
BENCHMARK(BM_Bilstm)->Arg(64)->Arg(256);

void BM_RfftAxis(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  TensorPtr x = noise_tensor({4, n}, 8);
  for (auto _ : state) {
    auto [re, im] = rfft_axis(x, 1);
    benchmark::DoNotOptimize(re->data.data());
    benchmark::DoNotOptimize(im->data.data());
  }
}
BENCHMARK(BM_RfftAxis)->Arg(256)->Arg(1000)->Arg(4096);

void BM_Stft(benchmark::State& state) {
  RngState rng(9);
  AudioBuffer audio;
  audio.sample_rate = 44100;
  audio.samples.assign(2, std::vector<double>(44100));
  for (auto& ch : audio.samples)
    for (double& v : ch) v = 0.1 * rng.normal();
  StftConfig cfg;
  for (auto _ : state) {
    ComplexSpectrogram spec = stft(audio, cfg);
    benchmark::DoNotOptimize(spec.data->data.data());
  }
}
BENCHMARK(BM_Stft);

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.stft.fft_size = 126;
  cfg.stft.hop = 42;
  cfg.bands.proportions = {0.25, 0.375, 0.375};
  cfg.bands.strides = {1, 2, 4};
  cfg.channel_ladder = {8, 16, 32};
  cfg.conv_module_counts = {1, 1, 1};
  cfg.dual_path.n_layers = 2;
  cfg.dual_path.channels = 32;
  cfg.dual_path.hidden_odd = 8;
  cfg.dual_path.hidden_even = 16;
  cfg.sources = {"drums", "bass", "other", "vocals"};
  return cfg;
}

void BM_ModelForward(benchmark::State& state) {
  ModelConfig cfg = small_config();
  Model model(cfg);
  RngState rng(10);
  model.init(rng);
  TensorPtr spec = noise_tensor({1, cfg.stft.bins(), 16, cfg.in_channels}, 11);
  for (auto _ : state) {
    std::vector<TensorPtr> out = model.forward(spec);
    benchmark::DoNotOptimize(out[0]->data.data());
  }
}
BENCHMARK(BM_ModelForward);

void BM_ModelBackward(benchmark::State& state) {
  ModelConfig cfg = small_config();
  Model model(cfg);
  RngState rng(12);
  model.init(rng);
  TensorPtr spec = noise_tensor({1, cfg.stft.bins(), 16, cfg.in_channels}, 13);
  for (auto _ : state) {
    std::vector<TensorPtr> out = model.forward(spec);
    TensorPtr total = sum_all(out[0]);
    for (std::size_t s = 1; s < out.size(); ++s)
      total = add(total, sum_all(out[s]));
    total->backward();
    benchmark::DoNotOptimize(total->data.data());
  }
}
BENCHMARK(BM_ModelBackward);

}  // namespace

BENCHMARK_MAIN();
