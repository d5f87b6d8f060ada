// Copyright 2026 The AGE Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// RIFF/WAVE reading (PCM16 and IEEE float32, any channel count) and PCM16
// mono writing. All multi-byte fields are little-endian on disk.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "agekit/error.hpp"
#include "agekit/waveform.hpp"

namespace agekit {

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace detail

// Decodes a WAV image held in memory. `channel` selects which interleaved
// channel is kept.
inline Waveform decode_wav(const std::vector<unsigned char>& bytes, int channel = 0,
                           const std::string& name = "<memory>") {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kFormat, name + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    std::uint32_t size = detail::read_u32le(chunk + 4);
    std::size_t body = pos + 8;
    std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) fail("truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      format = detail::read_u16le(f);
      channels = detail::read_u16le(f + 2);
      rate = detail::read_u32le(f + 4);
      bits = detail::read_u16le(f + 14);
      // WAVE_FORMAT_EXTENSIBLE keeps the real tag in the sub-format GUID.
      if (format == 0xFFFE) {
        if (size < 26) fail("truncated extensible fmt chunk");
        format = detail::read_u16le(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      // Streams written without a final size often carry 0 or 0xFFFFFFFF.
      data_size = std::min<std::size_t>(size, avail);
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) fail("missing fmt chunk");
  if (data == nullptr) fail("missing data chunk");
  if (channels == 0) fail("zero channels");
  if (rate == 0) fail("zero sample rate");
  if (channel < 0 || channel >= channels) {
    throw Error(ErrorCode::kInvalidArgument,
                name + ": channel " + std::to_string(channel) + " out of range (file has " +
                    std::to_string(channels) + ")");
  }

  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  if (!pcm16 && !float32) {
    fail("unsupported codec (format tag " + std::to_string(format) + ", " +
         std::to_string(bits) + " bits)");
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n = data_size / frame_bytes;
  if (n == 0) throw Error(ErrorCode::kEmptyInput, name + ": no audio samples");

  Waveform w;
  w.sample_rate_hz = static_cast<int>(rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = data + i * frame_bytes + channel * bytes_per_sample;
    if (pcm16) {
      auto v = static_cast<std::int16_t>(detail::read_u16le(p));
      w.samples[i] = static_cast<double>(v) / 32768.0;
    } else {
      w.samples[i] = static_cast<double>(std::bit_cast<float>(detail::read_u32le(p)));
    }
  }
  return w;
}

inline Waveform load_wav(const std::filesystem::path& path, int channel = 0) {
  return decode_wav(detail::read_file_bytes(path), channel, path.string());
}

inline std::int16_t quantize_pcm16(double x) {
  double clipped = std::clamp(x, -1.0, 1.0);
  double scaled = std::round(clipped * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

inline std::string encode_wav(const Waveform& w) {
  check_waveform(w);
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite sample");
  }
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  detail::put_u32le(out, 36 + data_bytes);
  out += "WAVEfmt ";
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);  // PCM
  detail::put_u16le(out, 1);  // mono
  detail::put_u32le(out, static_cast<std::uint32_t>(w.sample_rate_hz));
  detail::put_u32le(out, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
  detail::put_u16le(out, 2);
  detail::put_u16le(out, 16);
  out += "data";
  detail::put_u32le(out, data_bytes);
  for (double v : w.samples) {
    detail::put_u16le(out, static_cast<std::uint16_t>(quantize_pcm16(v)));
  }
  return out;
}

inline void save_wav(const Waveform& w, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_wav(w));
}

}  // namespace agekit
