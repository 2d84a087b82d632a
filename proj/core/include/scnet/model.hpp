#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scnet/bandplan.hpp"
#include "scnet/decoder.hpp"
#include "scnet/encoder.hpp"
#include "scnet/rng.hpp"
#include "scnet/separator.hpp"
#include "scnet/spectral.hpp"
#include "scnet/tensor.hpp"

namespace scnet {

// Ordered, named registry of trainable tensors. Registration order is the
// canonical parameter order used by the optimizer and checkpoints.
class ParamStore {
 public:
  enum class Init { weight, bias, one };

  TensorPtr create(const std::string& name, Shape shape, Init init);
  TensorPtr find(const std::string& name) const;  // nullptr when absent
  const std::vector<std::pair<std::string, TensorPtr>>& entries() const {
    return entries_;
  }

  std::int64_t total_params() const;
  void set_requires_grad(bool on);
  void zero_grad();

  // Weights uniform in +-sqrt(1/fan_in), biases zero, norm gains one; a
  // single rng stream consumed in registration order.
  void init_values(RngState& rng);

 private:
  std::vector<std::pair<std::string, TensorPtr>> entries_;
  std::vector<Init> kinds_;
};

struct ModelConfig {
  StftConfig stft;
  BandSplitSpec bands;
  std::array<int, 3> channel_ladder{32, 64, 128};
  std::array<int, 3> conv_module_counts{3, 2, 1};
  int in_channels = 4;
  int norm_groups = 4;
  DualPathConfig dual_path;
  std::vector<std::string> sources{"drums", "bass", "other", "vocals"};
  int features_per_source = 4;

  void validate() const;  // throws ConfigError naming the offending field
};

struct ParamCountRow {
  std::string name;
  std::int64_t count = 0;
};

struct ParamCountReport {
  std::int64_t total = 0;
  std::vector<ParamCountRow> rows;
};

// Analytic parameter count from the config alone; rows sum to total.
ParamCountReport param_count(const ModelConfig& cfg);

// Full network: band-split encoder, dual-path separator, up-sampling decoder.
class Model {
 public:
  explicit Model(ModelConfig cfg);

  void init(RngState& rng) { store_.init_values(rng); }

  // spec: [B, F, T, in_channels] with F == stft bins.
  // Returns one [B, F, T, features_per_source] tensor per source.
  std::vector<TensorPtr> forward(TensorPtr spec) const;

  const ModelConfig& config() const { return cfg_; }
  const std::vector<BandPlan>& plans() const { return plans_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

 private:
  ModelConfig cfg_;
  std::vector<BandPlan> plans_;
  ParamStore store_;
  EncoderConfig enc_cfg_;
  EncoderParams enc_;
  SeparatorParams sep_;
  DecoderParams dec_;
};

}  // namespace scnet
