#include "scnet/model.hpp"

#include <cmath>

#include "scnet/ops.hpp"

namespace scnet {

TensorPtr ParamStore::create(const std::string& name, Shape shape, Init init) {
  if (find(name) != nullptr) {
    throw ConfigError("ParamStore: duplicate parameter name " + name);
  }
  TensorPtr t = Tensor::zeros(std::move(shape));
  entries_.emplace_back(name, t);
  kinds_.push_back(init);
  return t;
}

TensorPtr ParamStore::find(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  return nullptr;
}

std::int64_t ParamStore::total_params() const {
  std::int64_t n = 0;
  for (const auto& [name, t] : entries_) n += t->numel();
  return n;
}

void ParamStore::set_requires_grad(bool on) {
  for (auto& [name, t] : entries_) t->requires_grad = on;
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : entries_) t->zero_grad();
}

void ParamStore::init_values(RngState& rng) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    TensorPtr& t = entries_[i].second;
    switch (kinds_[i]) {
      case Init::one:
        for (double& v : t->data) v = 1.0;
        break;
      case Init::bias:
        for (double& v : t->data) v = 0.0;
        break;
      case Init::weight: {
        std::int64_t fan_in = 1;
        for (int a = 0; a + 1 < t->rank(); ++a) fan_in *= t->dim(a);
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (double& v : t->data) v = rng.uniform(-bound, bound);
        break;
      }
    }
  }
}

void ModelConfig::validate() const {
  stft.validate();
  bands.validate();
  if (in_channels <= 0) {
    throw ConfigError("ModelConfig.in_channels must be positive, got " +
                      std::to_string(in_channels));
  }
  if (features_per_source != in_channels) {
    throw ConfigError("ModelConfig.features_per_source must equal in_channels (" +
                      std::to_string(in_channels) + ") so sources mirror the input, got " +
                      std::to_string(features_per_source));
  }

  EncoderConfig enc;
  enc.bands = bands;
  enc.channel_ladder = channel_ladder;
  enc.conv_module_counts = conv_module_counts;
  enc.in_channels = in_channels;
  enc.norm_groups = norm_groups;
  enc.validate();

  dual_path.validate();
  if (dual_path.channels != channel_ladder[2]) {
    throw ConfigError("ModelConfig.dual_path.channels must equal channel_ladder[2] (" +
                      std::to_string(channel_ladder[2]) + "), got " +
                      std::to_string(dual_path.channels));
  }

  DecoderConfig dec;
  dec.sources = sources;
  dec.features_per_source = features_per_source;
  dec.validate();

  // Ensures every level of the cascade keeps all three bands non-empty.
  cascade(stft.bins(), bands, 3);
}

namespace {

std::int64_t conv_module_params(std::int64_t c) {
  const std::int64_t h = c / 4;
  return 2 * c + 3 * c * h + h + 3 * h * h + h + h * c + c;
}

std::int64_t sd_block_params(const ModelConfig& cfg, std::int64_t c_in,
                             std::int64_t c_out) {
  std::int64_t n = 0;
  for (int b = 0; b < 3; ++b) {
    n += cfg.conv_module_counts[b] * conv_module_params(c_in);
    n += cfg.bands.strides[b] * c_in * c_out + c_out;
  }
  return n;
}

std::int64_t unit_params(std::int64_t c, std::int64_t h) {
  const std::int64_t lstm_dir = c * 4 * h + h * 4 * h + 4 * h;
  return 2 * c + 2 * lstm_dir + 2 * h * c + c;
}

std::int64_t su_params(const ModelConfig& cfg, std::int64_t c_target,
                       std::int64_t c_in) {
  std::int64_t n = 0;
  for (int b = 0; b < 3; ++b) n += cfg.bands.strides[b] * c_target * c_in + c_target;
  return n;
}

std::int64_t fusion_params(std::int64_t c) { return 9 * (2 * c) * (2 * c) + 2 * c; }

}  // namespace

ParamCountReport param_count(const ModelConfig& cfg) {
  cfg.validate();
  ParamCountReport rep;
  std::int64_t c_in = cfg.in_channels;
  for (int i = 0; i < 3; ++i) {
    const std::int64_t c_out = cfg.channel_ladder[i];
    rep.rows.push_back({"encoder.block" + std::to_string(i),
                        sd_block_params(cfg, c_in, c_out)});
    c_in = c_out;
  }
  for (int i = 0; i < cfg.dual_path.n_layers; ++i) {
    const bool transformed = i % 2 == 1;
    const std::int64_t c =
        transformed ? 2 * cfg.dual_path.channels : cfg.dual_path.channels;
    const std::int64_t h =
        transformed ? cfg.dual_path.hidden_even : cfg.dual_path.hidden_odd;
    rep.rows.push_back({"separator.layer" + std::to_string(i), 2 * unit_params(c, h)});
  }
  const std::int64_t sources = static_cast<std::int64_t>(cfg.sources.size());
  const std::int64_t l0 = cfg.channel_ladder[0], l1 = cfg.channel_ladder[1],
                     l2 = cfg.channel_ladder[2];
  rep.rows.push_back({"decoder.su0", su_params(cfg, l1, l2)});
  rep.rows.push_back({"decoder.fusion0", fusion_params(l1)});
  rep.rows.push_back({"decoder.su1", su_params(cfg, l0, l1)});
  rep.rows.push_back({"decoder.fusion1", fusion_params(l0)});
  rep.rows.push_back(
      {"decoder.su2", su_params(cfg, sources * cfg.features_per_source, l0)});
  for (const auto& row : rep.rows) rep.total += row.count;
  return rep;
}

namespace {

ConvModuleParams build_conv_module(ParamStore& store, const std::string& prefix,
                                   std::int64_t c) {
  const std::int64_t h = c / 4;
  ConvModuleParams p;
  p.gamma = store.create(prefix + "gamma", {c}, ParamStore::Init::one);
  p.beta = store.create(prefix + "beta", {c}, ParamStore::Init::bias);
  p.k1 = store.create(prefix + "k1", {3, c, h}, ParamStore::Init::weight);
  p.b1 = store.create(prefix + "b1", {h}, ParamStore::Init::bias);
  p.k2 = store.create(prefix + "k2", {3, h, h}, ParamStore::Init::weight);
  p.b2 = store.create(prefix + "b2", {h}, ParamStore::Init::bias);
  p.k3 = store.create(prefix + "k3", {1, h, c}, ParamStore::Init::weight);
  p.b3 = store.create(prefix + "b3", {c}, ParamStore::Init::bias);
  return p;
}

LstmDirParams build_lstm_dir(ParamStore& store, const std::string& prefix,
                             std::int64_t c, std::int64_t h) {
  LstmDirParams p;
  p.w_ih = store.create(prefix + "w_ih", {c, 4 * h}, ParamStore::Init::weight);
  p.w_hh = store.create(prefix + "w_hh", {h, 4 * h}, ParamStore::Init::weight);
  p.bias = store.create(prefix + "bias", {4 * h}, ParamStore::Init::bias);
  return p;
}

DualPathUnitParams build_unit(ParamStore& store, const std::string& prefix,
                              std::int64_t c, std::int64_t h) {
  DualPathUnitParams u;
  u.gamma = store.create(prefix + "gamma", {c}, ParamStore::Init::one);
  u.beta = store.create(prefix + "beta", {c}, ParamStore::Init::bias);
  u.lstm.fwd = build_lstm_dir(store, prefix + "lstm.fwd.", c, h);
  u.lstm.bwd = build_lstm_dir(store, prefix + "lstm.bwd.", c, h);
  u.w_out = store.create(prefix + "w_out", {2 * h, c}, ParamStore::Init::weight);
  u.b_out = store.create(prefix + "b_out", {c}, ParamStore::Init::bias);
  return u;
}

SuLayerParams build_su(ParamStore& store, const std::string& prefix,
                       const BandSplitSpec& bands, std::int64_t c_target,
                       std::int64_t c_in) {
  SuLayerParams p;
  for (int b = 0; b < 3; ++b) {
    const std::string bp = prefix + "band" + std::to_string(b) + ".";
    p.bands[b].kernel = store.create(bp + "kernel", {bands.strides[b], c_target, c_in},
                                     ParamStore::Init::weight);
    p.bands[b].bias = store.create(bp + "bias", {c_target}, ParamStore::Init::bias);
  }
  return p;
}

}  // namespace

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();

  std::int64_t f = cfg_.stft.bins();
  for (int i = 0; i < 3; ++i) {
    plans_.push_back(plan(f, cfg_.bands));
    f = plans_.back().total_out_width;
  }

  enc_cfg_.bands = cfg_.bands;
  enc_cfg_.channel_ladder = cfg_.channel_ladder;
  enc_cfg_.conv_module_counts = cfg_.conv_module_counts;
  enc_cfg_.in_channels = cfg_.in_channels;
  enc_cfg_.norm_groups = cfg_.norm_groups;

  std::int64_t c_in = cfg_.in_channels;
  for (int i = 0; i < 3; ++i) {
    const std::int64_t c_out = cfg_.channel_ladder[i];
    const std::string block = "encoder.block" + std::to_string(i) + ".";
    for (int b = 0; b < 3; ++b) {
      for (int j = 0; j < cfg_.conv_module_counts[b]; ++j) {
        const std::string prefix =
            block + "band" + std::to_string(b) + ".mod" + std::to_string(j) + ".";
        enc_.blocks[i].band_modules[b].push_back(build_conv_module(store_, prefix, c_in));
      }
    }
    for (int b = 0; b < 3; ++b) {
      const std::string prefix = block + "sd.band" + std::to_string(b) + ".";
      enc_.blocks[i].sd.bands[b].kernel =
          store_.create(prefix + "kernel", {cfg_.bands.strides[b], c_in, c_out},
                        ParamStore::Init::weight);
      enc_.blocks[i].sd.bands[b].bias =
          store_.create(prefix + "bias", {c_out}, ParamStore::Init::bias);
    }
    c_in = c_out;
  }

  for (int i = 0; i < cfg_.dual_path.n_layers; ++i) {
    const bool transformed = i % 2 == 1;
    const std::int64_t c =
        transformed ? 2 * cfg_.dual_path.channels : cfg_.dual_path.channels;
    const std::int64_t h =
        transformed ? cfg_.dual_path.hidden_even : cfg_.dual_path.hidden_odd;
    const std::string layer = "separator.layer" + std::to_string(i) + ".";
    DualPathLayerParams lp;
    lp.time_unit = build_unit(store_, layer + "time.", c, h);
    lp.freq_unit = build_unit(store_, layer + "freq.", c, h);
    sep_.layers.push_back(lp);
  }

  const std::int64_t sources = static_cast<std::int64_t>(cfg_.sources.size());
  const std::int64_t l0 = cfg_.channel_ladder[0], l1 = cfg_.channel_ladder[1],
                     l2 = cfg_.channel_ladder[2];
  dec_.su[0] = build_su(store_, "decoder.su0.", cfg_.bands, l1, l2);
  dec_.fusion[0].kernel = store_.create("decoder.fusion0.kernel", {3, 3, 2 * l1, 2 * l1},
                                        ParamStore::Init::weight);
  dec_.fusion[0].bias =
      store_.create("decoder.fusion0.bias", {2 * l1}, ParamStore::Init::bias);
  dec_.su[1] = build_su(store_, "decoder.su1.", cfg_.bands, l0, l1);
  dec_.fusion[1].kernel = store_.create("decoder.fusion1.kernel", {3, 3, 2 * l0, 2 * l0},
                                        ParamStore::Init::weight);
  dec_.fusion[1].bias =
      store_.create("decoder.fusion1.bias", {2 * l0}, ParamStore::Init::bias);
  dec_.su[2] = build_su(store_, "decoder.su2.", cfg_.bands,
                        sources * cfg_.features_per_source, l0);
}

std::vector<TensorPtr> Model::forward(TensorPtr spec) const {
  if (spec->rank() != 4) {
    throw ShapeError("Model::forward: expected [B, F, T, C], got " +
                     shape_str(spec->shape));
  }
  if (spec->dim(1) != cfg_.stft.bins()) {
    throw ShapeError("Model::forward: input has " + std::to_string(spec->dim(1)) +
                     " frequency bins, stft config yields " +
                     std::to_string(cfg_.stft.bins()));
  }

  EncoderOut enc_out = encoder_forward(std::move(spec), enc_cfg_, enc_, plans_);
  TensorPtr sep_out = separator_forward(enc_out.latent, cfg_.dual_path, sep_);

  DecoderConfig dec_cfg;
  dec_cfg.sources = cfg_.sources;
  dec_cfg.features_per_source = cfg_.features_per_source;
  return decoder_forward(sep_out, enc_out.skips, plans_, dec_cfg, dec_);
}

}  // namespace scnet
