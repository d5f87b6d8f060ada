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

// Feature export. Binary layout: "AGEF", N (u32 LE), D (u32 LE), then N*D
// float32 LE values row-major. CSV: one frame per line, no header.
// Frame labels are plain text, one integer per line.

#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "agekit/detail/format.hpp"
#include "agekit/error.hpp"
#include "agekit/features.hpp"
#include "agekit/wav.hpp"

namespace agekit {

inline std::string encode_agef(const FeatureMatrix& f) {
  std::string out = "AGEF";
  detail::put_u32le(out, static_cast<std::uint32_t>(f.frames()));
  detail::put_u32le(out, static_cast<std::uint32_t>(f.dim()));
  out.reserve(out.size() + static_cast<std::size_t>(f.values.size()) * 4);
  for (Eigen::Index r = 0; r < f.frames(); ++r) {
    for (Eigen::Index c = 0; c < f.dim(); ++c) {
      detail::put_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(f.values(r, c))));
    }
  }
  return out;
}

inline FeatureMatrix decode_agef(const std::vector<unsigned char>& bytes,
                                 const std::string& name = "<memory>") {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "AGEF", 4) != 0) {
    throw Error(ErrorCode::kFormat, name + ": missing AGEF header");
  }
  const std::uint32_t n = detail::read_u32le(bytes.data() + 4);
  const std::uint32_t d = detail::read_u32le(bytes.data() + 8);
  const std::uint64_t need = 12 + static_cast<std::uint64_t>(n) * d * 4;
  if (bytes.size() != need) {
    throw Error(ErrorCode::kFormat, name + ": payload size does not match " + std::to_string(n) +
                                        "x" + std::to_string(d));
  }
  if (n == 0 || d == 0) throw Error(ErrorCode::kEmptyInput, name + ": empty feature matrix");
  FeatureMatrix f;
  f.values.resize(n, d);
  const unsigned char* p = bytes.data() + 12;
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < d; ++c, p += 4) {
      f.values(r, c) = static_cast<double>(std::bit_cast<float>(detail::read_u32le(p)));
    }
  }
  return f;
}

inline void save_agef(const FeatureMatrix& f, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_agef(f));
}

inline FeatureMatrix load_agef(const std::filesystem::path& path) {
  return decode_agef(detail::read_file_bytes(path), path.string());
}

inline std::string encode_feature_csv(const FeatureMatrix& f) {
  std::string out;
  for (Eigen::Index r = 0; r < f.frames(); ++r) {
    for (Eigen::Index c = 0; c < f.dim(); ++c) {
      if (c) out += ',';
      out += detail::format_double(f.values(r, c));
    }
    out += '\n';
  }
  return out;
}

inline void save_feature_csv(const FeatureMatrix& f, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_feature_csv(f));
}

inline std::vector<int> parse_labels(const std::string& text, const std::string& name = "labels") {
  std::vector<int> labels;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view tok = detail::trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    if (tok.empty()) continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw Error(ErrorCode::kParse, name + ": line " + std::to_string(line_no) +
                                         ": not an integer label");
    }
    labels.push_back(v);
  }
  return labels;
}

inline std::vector<int> load_labels(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return parse_labels(std::string(bytes.begin(), bytes.end()), path.string());
}

}  // namespace agekit
