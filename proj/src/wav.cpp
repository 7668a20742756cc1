#include "binaural/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "binaural/errors.hpp"

namespace binaural {

namespace {

static_assert(std::endian::native == std::endian::little,
              "wav i/o assumes a little-endian host");

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xfffe;

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
};

uint32_t read_u32(const unsigned char* p) {
  uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

uint16_t read_u16(const unsigned char* p) {
  uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

void append_u32(std::vector<unsigned char>& out, uint32_t v) {
  const size_t at = out.size();
  out.resize(at + 4);
  std::memcpy(out.data() + at, &v, 4);
}

void append_u16(std::vector<unsigned char>& out, uint16_t v) {
  const size_t at = out.size();
  out.resize(at + 2);
  std::memcpy(out.data() + at, &v, 2);
}

double decode_sample(const unsigned char* p, const FmtChunk& fmt) {
  switch (fmt.bits_per_sample) {
    case 16: {
      int16_t v;
      std::memcpy(&v, p, 2);
      return static_cast<double>(v) / 32768.0;
    }
    case 24: {
      int32_t v = (p[0] << 8) | (p[1] << 16) | (static_cast<int32_t>(p[2]) << 24);
      v >>= 8;  // sign-extend
      return static_cast<double>(v) / 8388608.0;
    }
    case 32: {
      float v;
      std::memcpy(&v, p, 4);
      return static_cast<double>(v);
    }
    default:
      throw UnsupportedFormat("wav_read: unsupported bit depth");
  }
}

int32_t clamp_round(double x, int32_t lo, int32_t hi) {
  const double r = std::nearbyint(x);
  if (r < lo) return lo;
  if (r > hi) return hi;
  return static_cast<int32_t>(r);
}

}  // namespace

WavData wav_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("wav_read: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw UnsupportedFormat("wav_read: not a RIFF/WAVE file");

  FmtChunk fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  size_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint32_t chunk_len = read_u32(bytes.data() + pos + 4);
    const unsigned char* body = bytes.data() + pos + 8;
    if (pos + 8 + chunk_len > bytes.size())
      throw ParseError("wav_read: truncated chunk");
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw ParseError("wav_read: short fmt chunk");
      fmt.format = read_u16(body);
      fmt.channels = read_u16(body + 2);
      fmt.sample_rate = read_u32(body + 4);
      fmt.bits_per_sample = read_u16(body + 14);
      if (fmt.format == kFormatExtensible && chunk_len >= 40)
        fmt.format = read_u16(body + 24);  // sub-format GUID starts with the tag
      have_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data == nullptr) throw ParseError("wav_read: missing fmt or data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0) throw ParseError("wav_read: bad fmt fields");

  WavData out;
  out.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  if (fmt.format == kFormatPcm && fmt.bits_per_sample == 16)
    out.format = WavFormat::Pcm16;
  else if (fmt.format == kFormatPcm && fmt.bits_per_sample == 24)
    out.format = WavFormat::Pcm24;
  else if (fmt.format == kFormatFloat && fmt.bits_per_sample == 32)
    out.format = WavFormat::Float32;
  else
    throw UnsupportedFormat("wav_read: only PCM16/24 and float32 are supported");

  const size_t bytes_per_sample = fmt.bits_per_sample / 8;
  const size_t stride = bytes_per_sample * fmt.channels;
  const size_t num_frames = data_len / stride;
  out.samples.resize(fmt.channels, static_cast<Index>(num_frames));
  for (size_t t = 0; t < num_frames; ++t)
    for (uint16_t ch = 0; ch < fmt.channels; ++ch)
      out.samples(ch, static_cast<Index>(t)) =
          decode_sample(data + t * stride + ch * bytes_per_sample, fmt);
  return out;
}

void wav_write(const std::string& path, const RMatrix& samples, int sample_rate_hz,
               WavFormat format) {
  if (samples.rows() < 1) throw PreconditionError("wav_write: no channels");
  if (sample_rate_hz <= 0) throw PreconditionError("wav_write: bad sample rate");

  const uint16_t channels = static_cast<uint16_t>(samples.rows());
  const Index frames = samples.cols();
  uint16_t bits = 0, tag = 0;
  switch (format) {
    case WavFormat::Pcm16: bits = 16; tag = kFormatPcm; break;
    case WavFormat::Pcm24: bits = 24; tag = kFormatPcm; break;
    case WavFormat::Float32: bits = 32; tag = kFormatFloat; break;
  }
  const uint32_t bytes_per_frame = channels * bits / 8u;
  const uint32_t data_len = static_cast<uint32_t>(frames) * bytes_per_frame;

  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  append_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  append_u32(out, 16);
  append_u16(out, tag);
  append_u16(out, channels);
  append_u32(out, static_cast<uint32_t>(sample_rate_hz));
  append_u32(out, static_cast<uint32_t>(sample_rate_hz) * bytes_per_frame);
  append_u16(out, static_cast<uint16_t>(bytes_per_frame));
  append_u16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  append_u32(out, data_len);

  for (Index t = 0; t < frames; ++t) {
    for (uint16_t ch = 0; ch < channels; ++ch) {
      const double x = samples(ch, t);
      switch (format) {
        case WavFormat::Pcm16: {
          const int32_t v = clamp_round(x * 32768.0, -32768, 32767);
          append_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
          break;
        }
        case WavFormat::Pcm24: {
          const int32_t v = clamp_round(x * 8388608.0, -8388608, 8388607);
          out.push_back(static_cast<unsigned char>(v & 0xff));
          out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
          out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
          break;
        }
        case WavFormat::Float32: {
          const float v = static_cast<float>(x);
          const size_t at = out.size();
          out.resize(at + 4);
          std::memcpy(out.data() + at, &v, 4);
          break;
        }
      }
    }
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("wav_write: cannot open " + path + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("wav_write: write failed for " + path);
}

}  // namespace binaural
