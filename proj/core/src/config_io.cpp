#include "scnet/config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "scnet/errors.hpp"

namespace scnet {

namespace {

using njson = nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const njson& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known)
      throw ConfigError("config: unknown key \"" + join(path, it.key()) + "\"");
  }
}

const njson* member(const njson& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

njson require_object(const njson& parent, const std::string& path) {
  if (!parent.is_object())
    throw ConfigError("config: " + path + " must be an object");
  return parent;
}

double get_double(const njson& obj, const std::string& path, const char* key,
                  double fallback) {
  const njson* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_number())
    throw ConfigError("config: " + join(path, key) + " must be a number");
  return v->get<double>();
}

int get_int(const njson& obj, const std::string& path, const char* key, int fallback) {
  const njson* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    throw ConfigError("config: " + join(path, key) + " must be an integer");
  return v->get<int>();
}

std::int64_t get_i64(const njson& obj, const std::string& path, const char* key,
                     std::int64_t fallback) {
  const njson* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    throw ConfigError("config: " + join(path, key) + " must be an integer");
  return v->get<std::int64_t>();
}

std::uint64_t get_u64(const njson& obj, const std::string& path, const char* key,
                      std::uint64_t fallback) {
  const njson* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer() ||
      (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
    throw ConfigError("config: " + join(path, key) + " must be a non-negative integer");
  return v->get<std::uint64_t>();
}

bool get_bool(const njson& obj, const std::string& path, const char* key, bool fallback) {
  const njson* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean())
    throw ConfigError("config: " + join(path, key) + " must be a boolean");
  return v->get<bool>();
}

template <typename T, std::size_t N>
std::array<T, N> get_array(const njson& obj, const std::string& path, const char* key,
                           std::array<T, N> fallback, bool integral) {
  const njson* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_array() || v->size() != N)
    throw ConfigError("config: " + join(path, key) + " must be an array of " +
                      std::to_string(N) + " numbers");
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    const njson& e = (*v)[i];
    if (integral ? !e.is_number_integer() : !e.is_number())
      throw ConfigError("config: " + join(path, key) + "[" + std::to_string(i) + "] must be " +
                        (integral ? "an integer" : "a number"));
    out[i] = e.get<T>();
  }
  return out;
}

std::vector<std::string> get_strings(const njson& obj, const std::string& path,
                                     const char* key, std::vector<std::string> fallback) {
  const njson* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_array())
    throw ConfigError("config: " + join(path, key) + " must be an array of strings");
  std::vector<std::string> out;
  for (const njson& e : *v) {
    if (!e.is_string())
      throw ConfigError("config: " + join(path, key) + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

ModelConfig model_from(const njson& obj, const std::string& path) {
  require_object(obj, path);
  check_keys(obj, path,
             {"stft", "bands", "channel_ladder", "conv_module_counts", "norm_groups",
              "dual_path", "sources"});
  ModelConfig cfg;

  if (const njson* stft = member(obj, "stft")) {
    const std::string p = join(path, "stft");
    require_object(*stft, p);
    check_keys(*stft, p, {"fft_size", "hop"});
    cfg.stft.fft_size = get_i64(*stft, p, "fft_size", cfg.stft.fft_size);
    cfg.stft.hop = get_i64(*stft, p, "hop", cfg.stft.hop);
  }
  if (const njson* bands = member(obj, "bands")) {
    const std::string p = join(path, "bands");
    require_object(*bands, p);
    check_keys(*bands, p, {"proportions", "strides"});
    cfg.bands.proportions =
        get_array<double, 3>(*bands, p, "proportions", cfg.bands.proportions, false);
    cfg.bands.strides = get_array<int, 3>(*bands, p, "strides", cfg.bands.strides, true);
  }
  cfg.channel_ladder =
      get_array<int, 3>(obj, path, "channel_ladder", cfg.channel_ladder, true);
  cfg.conv_module_counts =
      get_array<int, 3>(obj, path, "conv_module_counts", cfg.conv_module_counts, true);
  cfg.norm_groups = get_int(obj, path, "norm_groups", cfg.norm_groups);
  if (const njson* dp = member(obj, "dual_path")) {
    const std::string p = join(path, "dual_path");
    require_object(*dp, p);
    check_keys(*dp, p, {"n_layers", "hidden_odd", "hidden_even"});
    cfg.dual_path.n_layers = get_int(*dp, p, "n_layers", cfg.dual_path.n_layers);
    cfg.dual_path.hidden_odd = get_int(*dp, p, "hidden_odd", cfg.dual_path.hidden_odd);
    cfg.dual_path.hidden_even = get_int(*dp, p, "hidden_even", cfg.dual_path.hidden_even);
  }
  cfg.sources = get_strings(obj, path, "sources", cfg.sources);

  cfg.dual_path.channels = cfg.channel_ladder[2];
  cfg.dual_path.norm_groups = cfg.norm_groups;
  return cfg;
}

njson model_to(const ModelConfig& cfg) {
  njson obj;
  obj["stft"] = {{"fft_size", cfg.stft.fft_size}, {"hop", cfg.stft.hop}};
  obj["bands"] = {{"proportions", cfg.bands.proportions},
                  {"strides", cfg.bands.strides}};
  obj["channel_ladder"] = cfg.channel_ladder;
  obj["conv_module_counts"] = cfg.conv_module_counts;
  obj["norm_groups"] = cfg.norm_groups;
  obj["dual_path"] = {{"n_layers", cfg.dual_path.n_layers},
                      {"hidden_odd", cfg.dual_path.hidden_odd},
                      {"hidden_even", cfg.dual_path.hidden_even}};
  obj["sources"] = cfg.sources;
  return obj;
}

TrainConfig train_from(const njson& obj, const std::string& path) {
  require_object(obj, path);
  check_keys(obj, path,
             {"segment_seconds", "segment_hop_seconds", "lr", "batch_size", "steps",
              "seed", "scale_min", "scale_max", "remix"});
  TrainConfig cfg;
  cfg.segment_seconds = get_double(obj, path, "segment_seconds", cfg.segment_seconds);
  cfg.segment_hop_seconds =
      get_double(obj, path, "segment_hop_seconds", cfg.segment_hop_seconds);
  cfg.lr = get_double(obj, path, "lr", cfg.lr);
  cfg.batch_size = get_int(obj, path, "batch_size", cfg.batch_size);
  cfg.steps = get_int(obj, path, "steps", cfg.steps);
  cfg.seed = get_u64(obj, path, "seed", cfg.seed);
  cfg.scale_min = get_double(obj, path, "scale_min", cfg.scale_min);
  cfg.scale_max = get_double(obj, path, "scale_max", cfg.scale_max);
  cfg.remix = get_bool(obj, path, "remix", cfg.remix);
  return cfg;
}

njson train_to(const TrainConfig& cfg) {
  njson obj;
  obj["segment_seconds"] = cfg.segment_seconds;
  obj["segment_hop_seconds"] = cfg.segment_hop_seconds;
  obj["lr"] = cfg.lr;
  obj["batch_size"] = cfg.batch_size;
  obj["steps"] = cfg.steps;
  obj["seed"] = cfg.seed;
  obj["scale_min"] = cfg.scale_min;
  obj["scale_max"] = cfg.scale_max;
  obj["remix"] = cfg.remix;
  return obj;
}

njson parse_text(const std::string& text) {
  njson obj = njson::parse(text, nullptr, false);
  if (obj.is_discarded()) throw ConfigError("config: not valid JSON");
  return obj;
}

}  // namespace

std::string model_config_to_json_text(const ModelConfig& cfg) {
  return model_to(cfg).dump(2) + "\n";
}

ModelConfig model_config_from_json_text(const std::string& text) {
  ModelConfig cfg = model_from(parse_text(text), "");
  cfg.validate();
  return cfg;
}

std::string app_config_to_json_text(const AppConfig& cfg) {
  njson obj;
  obj["model"] = model_to(cfg.model);
  obj["train"] = train_to(cfg.train);
  return obj.dump(2) + "\n";
}

AppConfig app_config_from_json_text(const std::string& text) {
  const njson obj = parse_text(text);
  if (!obj.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(obj, "", {"model", "train"});
  AppConfig cfg;
  if (const njson* model = member(obj, "model")) cfg.model = model_from(*model, "model");
  if (const njson* train = member(obj, "train")) cfg.train = train_from(*train, "train");
  cfg.model.validate();
  cfg.train.validate();
  return cfg;
}

AppConfig load_app_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open " + path);
  std::ostringstream text;
  text << file.rdbuf();
  return app_config_from_json_text(text.str());
}

void save_app_config(const std::string& path, const AppConfig& cfg) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << app_config_to_json_text(cfg);
  if (!file) throw IoError("write failed for " + path);
}

}  // namespace scnet
