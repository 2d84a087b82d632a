#include "scnet/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "scnet/errors.hpp"

namespace scnet {

namespace {

std::string at_byte(const std::string& path, std::size_t offset) {
  return path + " at byte " + std::to_string(offset);
}

struct Cursor {
  const std::vector<unsigned char>& bytes;
  const std::string& path;

  void need(std::size_t offset, std::size_t count, const char* what) const {
    if (offset + count > bytes.size())
      throw IoError(std::string("truncated ") + what + " in " + at_byte(path, offset) +
                    " (need " + std::to_string(count) + " bytes, have " +
                    std::to_string(bytes.size() - std::min(bytes.size(), offset)) + ")");
  }
  std::uint32_t u32(std::size_t offset, const char* what) const {
    need(offset, 4, what);
    return static_cast<std::uint32_t>(bytes[offset]) |
           static_cast<std::uint32_t>(bytes[offset + 1]) << 8 |
           static_cast<std::uint32_t>(bytes[offset + 2]) << 16 |
           static_cast<std::uint32_t>(bytes[offset + 3]) << 24;
  }
  std::uint16_t u16(std::size_t offset, const char* what) const {
    need(offset, 2, what);
    return static_cast<std::uint16_t>(bytes[offset] | bytes[offset + 1] << 8);
  }
  bool tag(std::size_t offset, const char* expected) const {
    return offset + 4 <= bytes.size() && std::memcmp(bytes.data() + offset, expected, 4) == 0;
  }
};

void push_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8 & 0xff));
}

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> 8 * i & 0xff));
}

void push_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)),
                                   std::istreambuf_iterator<char>());
  Cursor cur{bytes, path};

  if (!cur.tag(0, "RIFF")) throw IoError("missing RIFF tag in " + at_byte(path, 0));
  if (!cur.tag(8, "WAVE")) throw IoError("missing WAVE tag in " + at_byte(path, 8));

  bool have_fmt = false;
  std::uint16_t format_code = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t data_offset = 0, data_size = 0;
  bool have_data = false;

  std::size_t offset = 12;
  while (offset + 8 <= bytes.size()) {
    const std::size_t body = offset + 8;
    const std::uint32_t size = cur.u32(offset + 4, "chunk header");
    if (cur.tag(offset, "fmt ")) {
      if (size < 16)
        throw IoError("fmt chunk too small in " + at_byte(path, offset));
      cur.need(body, 16, "fmt chunk");
      format_code = cur.u16(body, "fmt chunk");
      channels = cur.u16(body + 2, "fmt chunk");
      sample_rate = cur.u32(body + 4, "fmt chunk");
      bits = cur.u16(body + 14, "fmt chunk");
      have_fmt = true;
    } else if (cur.tag(offset, "data")) {
      cur.need(body, size, "data chunk");
      data_offset = body;
      data_size = size;
      have_data = true;
    }
    offset = body + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt)
    throw IoError("missing fmt chunk in " + at_byte(path, std::min(offset, bytes.size())));
  if (!have_data)
    throw IoError("missing data chunk in " + at_byte(path, std::min(offset, bytes.size())));
  if (channels < 1 || channels > 2)
    throw IoError("unsupported channel count " + std::to_string(channels) + " in " + path);
  if (sample_rate < 1) throw IoError("invalid sample rate in " + path);

  int bytes_per_sample = 0;
  if (format_code == 1 && bits == 16) bytes_per_sample = 2;
  else if (format_code == 1 && bits == 24) bytes_per_sample = 3;
  else if (format_code == 3 && bits == 32) bytes_per_sample = 4;
  else
    throw IoError("unsupported codec (format " + std::to_string(format_code) + ", " +
                  std::to_string(bits) + "-bit) in " + path);

  const std::size_t frame = static_cast<std::size_t>(bytes_per_sample) * channels;
  const std::size_t n_frames = data_size / frame;
  if (n_frames == 0) throw IoError("empty data chunk in " + at_byte(path, data_offset));

  AudioBuffer audio;
  audio.sample_rate = static_cast<int>(sample_rate);
  audio.samples.assign(channels, std::vector<double>(n_frames, 0.0));
  const unsigned char* p = bytes.data() + data_offset;
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (int ch = 0; ch < channels; ++ch) {
      double v = 0.0;
      if (bytes_per_sample == 2) {
        const std::int16_t s = static_cast<std::int16_t>(p[0] | p[1] << 8);
        v = static_cast<double>(s) / 32768.0;
      } else if (bytes_per_sample == 3) {
        std::int32_t s = p[0] | p[1] << 8 | p[2] << 16;
        if (s & 0x800000) s |= ~0xffffff;  // sign-extend 24 -> 32
        v = static_cast<double>(s) / 8388608.0;
      } else {
        std::uint32_t raw = 0;
        std::memcpy(&raw, p, 4);
        v = static_cast<double>(std::bit_cast<float>(raw));
      }
      audio.samples[static_cast<std::size_t>(ch)][i] = v;
      p += bytes_per_sample;
    }
  }
  audio.validate();
  return audio;
}

void write_wav(const std::string& path, const AudioBuffer& audio, WavFormat format) {
  audio.validate();
  const int channels = static_cast<int>(audio.channels());
  const std::int64_t frames = audio.length();

  int bytes_per_sample = 0;
  std::uint16_t format_code = 1, bits = 0;
  switch (format) {
    case WavFormat::pcm16: bytes_per_sample = 2; bits = 16; break;
    case WavFormat::pcm24: bytes_per_sample = 3; bits = 24; break;
    case WavFormat::float32: bytes_per_sample = 4; bits = 32; format_code = 3; break;
  }

  const std::uint32_t data_size =
      static_cast<std::uint32_t>(frames * channels * bytes_per_sample);
  std::vector<unsigned char> out;
  out.reserve(64 + data_size);

  push_tag(out, "RIFF");
  push_u32(out, 0);  // patched below
  push_tag(out, "WAVE");

  push_tag(out, "fmt ");
  push_u32(out, 16);
  push_u16(out, format_code);
  push_u16(out, static_cast<std::uint16_t>(channels));
  push_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  const std::uint32_t byte_rate =
      static_cast<std::uint32_t>(audio.sample_rate) * channels * bytes_per_sample;
  push_u32(out, byte_rate);
  push_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
  push_u16(out, bits);

  if (format_code == 3) {  // non-PCM wants a fact chunk with the frame count
    push_tag(out, "fact");
    push_u32(out, 4);
    push_u32(out, static_cast<std::uint32_t>(frames));
  }

  push_tag(out, "data");
  push_u32(out, data_size);
  for (std::int64_t i = 0; i < frames; ++i) {
    for (int ch = 0; ch < channels; ++ch) {
      const double v = audio.samples[static_cast<std::size_t>(ch)][static_cast<std::size_t>(i)];
      if (format == WavFormat::pcm16) {
        const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        const std::int16_t s = static_cast<std::int16_t>(scaled);
        push_u16(out, static_cast<std::uint16_t>(s));
      } else if (format == WavFormat::pcm24) {
        const double scaled = std::clamp(std::round(v * 8388608.0), -8388608.0, 8388607.0);
        const std::int32_t s = static_cast<std::int32_t>(scaled);
        out.push_back(static_cast<unsigned char>(s & 0xff));
        out.push_back(static_cast<unsigned char>(s >> 8 & 0xff));
        out.push_back(static_cast<unsigned char>(s >> 16 & 0xff));
      } else {
        const std::uint32_t raw = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        push_u32(out, raw);
      }
    }
  }
  if (data_size & 1) out.push_back(0);

  const std::uint32_t riff_size = static_cast<std::uint32_t>(out.size() - 8);
  for (int i = 0; i < 4; ++i)
    out[static_cast<std::size_t>(4 + i)] = static_cast<unsigned char>(riff_size >> 8 * i & 0xff);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for " + path);
}

}  // namespace scnet
