#include "ser/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ser::wav {

namespace {

uint32_t rd_u32(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
uint16_t rd_u16(const unsigned char* p) { return uint16_t(p[0] | p[1] << 8); }

void wr_u32(std::ostream& os, uint32_t v) {
  char b[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff), char(v >> 24 & 0xff)};
  os.write(b, 4);
}
void wr_u16(std::ostream& os, uint16_t v) {
  char b[2] = {char(v & 0xff), char(v >> 8 & 0xff)};
  os.write(b, 2);
}

}  // namespace

WavData read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("wav: not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  size_t data_len = 0;
  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(bytes.data() + off);
    const uint32_t len = rd_u32(bytes.data() + off + 4);
    const size_t body = off + 8;
    if (body + len > bytes.size()) throw std::runtime_error("wav: truncated chunk in " + path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (len < 16) throw std::runtime_error("wav: malformed fmt chunk in " + path);
      format = rd_u16(bytes.data() + body);
      channels = rd_u16(bytes.data() + body + 2);
      rate = rd_u32(bytes.data() + body + 4);
      bits = rd_u16(bytes.data() + body + 14);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    off = body + len + (len & 1);  // chunks are word-aligned
  }
  if (!rate || !channels) throw std::runtime_error("wav: missing fmt chunk in " + path);
  if (!data) throw std::runtime_error("wav: missing data chunk in " + path);

  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.channels.assign(channels, {});
  if (format == 1 && bits == 16) {
    const size_t n = data_len / 2 / channels;
    for (auto& ch : out.channels) ch.resize(n);
    for (size_t i = 0; i < n; ++i)
      for (uint16_t c = 0; c < channels; ++c) {
        int16_t v;
        std::memcpy(&v, data + (i * channels + c) * 2, 2);
        out.channels[c][i] = double(v) / 32768.0;
      }
  } else if (format == 3 && bits == 32) {
    const size_t n = data_len / 4 / channels;
    for (auto& ch : out.channels) ch.resize(n);
    for (size_t i = 0; i < n; ++i)
      for (uint16_t c = 0; c < channels; ++c) {
        float v;
        std::memcpy(&v, data + (i * channels + c) * 4, 4);
        out.channels[c][i] = double(v);
      }
  } else {
    throw std::runtime_error("wav: unsupported format (want 16-bit PCM or 32-bit float): " + path);
  }
  return out;
}

void write_pcm16(const std::string& path, const std::vector<double>& mono, int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("wav: cannot write " + path);
  const uint32_t data_len = static_cast<uint32_t>(mono.size() * 2);
  os.write("RIFF", 4);
  wr_u32(os, 36 + data_len);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(os, 16);
  wr_u16(os, 1);  // PCM
  wr_u16(os, 1);  // mono
  wr_u32(os, static_cast<uint32_t>(sample_rate));
  wr_u32(os, static_cast<uint32_t>(sample_rate) * 2);
  wr_u16(os, 2);
  wr_u16(os, 16);
  os.write("data", 4);
  wr_u32(os, data_len);
  for (double s : mono) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<int16_t>(std::lround(c * 32767.0));
    wr_u16(os, static_cast<uint16_t>(v));
  }
}

dsp::Utterance load_utterance(const std::string& path, const std::string& id,
                              const std::string& speaker, int target_rate) {
  const WavData w = read(path);
  std::vector<double> mono(w.channels.empty() ? 0 : w.channels[0].size(), 0.0);
  for (const auto& ch : w.channels)
    for (size_t i = 0; i < mono.size(); ++i) mono[i] += ch[i] / double(w.channels.size());
  dsp::Utterance u;
  u.id = id;
  u.speaker = speaker;
  u.sample_rate = target_rate;
  u.samples = dsp::resample_linear(mono, w.sample_rate, target_rate);
  for (double& s : u.samples) s = std::clamp(s, -1.0, 1.0);
  return u;
}

}  // namespace ser::wav
