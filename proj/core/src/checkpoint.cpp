#include "scnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "scnet/config_io.hpp"
#include "scnet/errors.hpp"

namespace scnet {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'N', 'E', 'T', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> 8 * i & 0xff));
}

void push_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> 8 * i & 0xff));
}

void push_doubles(std::vector<unsigned char>& out, const std::vector<double>& values) {
  push_u64(out, values.size());
  for (double d : values) push_u64(out, std::bit_cast<std::uint64_t>(d));
}

void push_string(std::vector<unsigned char>& out, const std::string& s) {
  push_u64(out, s.size());
  out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
  const std::vector<unsigned char>& bytes;
  const std::string& path;
  std::size_t offset = 0;

  void need(std::size_t count, const char* what) {
    if (offset + count > bytes.size())
      throw IoError("truncated checkpoint " + path + " at byte " +
                    std::to_string(offset) + " (reading " + what + ")");
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << 8 * i;
    offset += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << 8 * i;
    offset += 8;
    return v;
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes[offset++];
  }
  std::string string(const char* what) {
    const std::uint64_t len = u64(what);
    need(len, what);
    std::string s(reinterpret_cast<const char*>(bytes.data() + offset),
                  static_cast<std::size_t>(len));
    offset += len;
    return s;
  }
  std::vector<double> doubles(const char* what) {
    const std::uint64_t count = u64(what);
    need(count * 8, what);
    std::vector<double> out(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < count; ++i)
      out[static_cast<std::size_t>(i)] = std::bit_cast<double>(u64(what));
    return out;
  }
};

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const AdamState& adam,
                     std::uint64_t rng_seed) {
  const auto& entries = model.params().entries();
  const bool has_moments = !adam.m.empty();
  if (has_moments &&
      (adam.m.size() != entries.size() || adam.v.size() != entries.size()))
    throw ConfigError("optimizer state does not match the model's parameter list");

  std::vector<unsigned char> out;
  out.insert(out.end(), kMagic, kMagic + 8);
  push_u32(out, kVersion);
  push_string(out, model_config_to_json_text(model.config()));
  push_u64(out, rng_seed);
  push_u64(out, static_cast<std::uint64_t>(adam.step));
  out.push_back(has_moments ? 1 : 0);

  push_u64(out, entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [name, tensor] = entries[i];
    push_string(out, name);
    push_u32(out, static_cast<std::uint32_t>(tensor->shape.size()));
    for (std::int64_t d : tensor->shape) push_u64(out, static_cast<std::uint64_t>(d));
    push_doubles(out, tensor->data);
    if (has_moments) {
      push_doubles(out, adam.m[i]);
      push_doubles(out, adam.v[i]);
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)),
                                   std::istreambuf_iterator<char>());
  Reader r{bytes, path};

  r.need(8, "magic");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw IoError("not a checkpoint file: " + path + " (bad magic at byte 0)");
  r.offset = 8;
  const std::uint32_t version = r.u32("version");
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version) + " in " +
                  path);

  const std::string config_text = r.string("model config");
  ModelConfig cfg;
  try {
    cfg = model_config_from_json_text(config_text);
  } catch (const ConfigError& e) {
    throw IoError("invalid model config in " + path + ": " + e.what());
  }

  const std::uint64_t rng_seed = r.u64("rng seed");
  AdamState adam;
  adam.step = static_cast<std::int64_t>(r.u64("optimizer step"));
  const bool has_moments = r.u8("moment flag") != 0;

  Model model(cfg);
  const auto& entries = model.params().entries();
  const std::uint64_t n_params = r.u64("parameter count");
  if (n_params != entries.size())
    throw IoError("checkpoint " + path + " holds " + std::to_string(n_params) +
                  " tensors but the stored config builds " +
                  std::to_string(entries.size()));

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string name = r.string("parameter name");
    if (name != entries[i].first)
      throw IoError("checkpoint " + path + " tensor \"" + name +
                    "\" does not match expected \"" + entries[i].first + "\"");
    const std::uint32_t rank = r.u32("tensor rank");
    Shape shape(rank);
    for (std::uint32_t d = 0; d < rank; ++d)
      shape[d] = static_cast<std::int64_t>(r.u64("tensor extent"));
    TensorPtr tensor = entries[i].second;
    if (shape != tensor->shape)
      throw IoError("checkpoint " + path + " tensor \"" + name +
                    "\" has a mismatched shape");
    std::vector<double> data = r.doubles("tensor data");
    if (data.size() != tensor->data.size())
      throw IoError("checkpoint " + path + " tensor \"" + name +
                    "\" has a mismatched element count");
    tensor->data = std::move(data);
    if (has_moments) {
      adam.m.push_back(r.doubles("first moment"));
      adam.v.push_back(r.doubles("second moment"));
      if (adam.m.back().size() != tensor->data.size() ||
          adam.v.back().size() != tensor->data.size())
        throw IoError("checkpoint " + path + " optimizer state for \"" + name +
                      "\" has a mismatched element count");
    }
  }
  if (r.offset != bytes.size())
    throw IoError("trailing bytes in checkpoint " + path + " at byte " +
                  std::to_string(r.offset));

  return LoadedCheckpoint{std::move(model), std::move(adam), rng_seed};
}

}  // namespace scnet
