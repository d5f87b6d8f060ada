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

// Corpus manifests. CSV with a header row (utt_id, clean_path,
// degraded_path, optional wer, any further columns are tags) or JSON lines
// with the same keys. Relative paths resolve against the manifest directory.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agekit/detail/format.hpp"
#include "agekit/error.hpp"

namespace agekit {

struct ManifestEntry {
  std::string utt_id;
  std::filesystem::path clean_path;
  std::filesystem::path degraded_path;
  std::optional<double> wer_percent;
  std::map<std::string, std::string> tags;

  bool operator==(const ManifestEntry&) const = default;
};

namespace manifest_detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

inline void check_entry(const ManifestEntry& e, std::size_t line, std::set<std::string>& seen) {
  const std::string where = "line " + std::to_string(line);
  if (e.utt_id.empty()) throw Error(ErrorCode::kParse, where + ": empty utt_id");
  if (e.clean_path.empty() || e.degraded_path.empty()) {
    throw Error(ErrorCode::kParse, where + ": empty audio path for '" + e.utt_id + "'");
  }
  if (e.wer_percent && (!std::isfinite(*e.wer_percent) || *e.wer_percent < 0.0)) {
    throw Error(ErrorCode::kParse, where + ": wer must be a non-negative number");
  }
  if (!seen.insert(e.utt_id).second) {
    throw Error(ErrorCode::kDuplicateId, where + ": duplicate utt_id '" + e.utt_id + "'");
  }
}

}  // namespace manifest_detail

inline std::vector<ManifestEntry> parse_manifest_csv(std::istream& in,
                                                     const std::filesystem::path& base = {}) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) header = detail::split_csv_line(line);
  }
  if (header.empty()) throw Error(ErrorCode::kEmptyInput, "manifest has no header");
  for (auto& h : header) h = std::string(detail::trim(h));

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"utt_id", "clean_path", "degraded_path"}) {
    if (!col.count(required)) {
      throw Error(ErrorCode::kMissingColumn, std::string("manifest lacks column '") + required + "'");
    }
  }

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(header.size()) + " fields, got " +
                                         std::to_string(fields.size()));
    }
    ManifestEntry e;
    for (std::size_t i = 0; i < header.size(); ++i) {
      const std::string value(detail::trim(fields[i]));
      const std::string& key = header[i];
      if (key == "utt_id") {
        e.utt_id = value;
      } else if (key == "clean_path") {
        e.clean_path = value.empty() ? "" : manifest_detail::resolve(base, value);
      } else if (key == "degraded_path") {
        e.degraded_path = value.empty() ? "" : manifest_detail::resolve(base, value);
      } else if (key == "wer") {
        if (!value.empty()) {
          e.wer_percent = detail::parse_double(value);
          if (!e.wer_percent) {
            throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                               ": unreadable wer '" + value + "'");
          }
        }
      } else {
        e.tags[key] = value;
      }
    }
    manifest_detail::check_entry(e, line_no, seen);
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<ManifestEntry> parse_manifest_jsonl(std::istream& in,
                                                       const std::filesystem::path& base = {}) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kParse, where + ": " + ex.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::kParse, where + ": expected a JSON object");
    for (const char* required : {"utt_id", "clean_path", "degraded_path"}) {
      if (!j.contains(required) || !j[required].is_string()) {
        throw Error(ErrorCode::kMissingColumn,
                    where + ": missing string field '" + std::string(required) + "'");
      }
    }
    ManifestEntry e;
    for (const auto& [key, value] : j.items()) {
      if (key == "utt_id") {
        e.utt_id = value.get<std::string>();
      } else if (key == "clean_path") {
        e.clean_path = manifest_detail::resolve(base, value.get<std::string>());
      } else if (key == "degraded_path") {
        e.degraded_path = manifest_detail::resolve(base, value.get<std::string>());
      } else if (key == "wer") {
        if (value.is_number()) {
          e.wer_percent = value.get<double>();
        } else if (value.is_string()) {
          e.wer_percent = detail::parse_double(value.get<std::string>());
          if (!e.wer_percent && !value.get<std::string>().empty()) {
            throw Error(ErrorCode::kParse, where + ": unreadable wer");
          }
        } else if (!value.is_null()) {
          throw Error(ErrorCode::kParse, where + ": wer must be a number or null");
        }
      } else {
        e.tags[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    manifest_detail::check_entry(e, line_no, seen);
    entries.push_back(std::move(e));
  }
  return entries;
}

// Format is chosen by extension (.jsonl / .json) or, failing that, by whether
// the first non-blank character is '{'.
inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto ext = path.extension().string();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool jsonl = ext == ".jsonl" || ext == ".json" ||
                     (first != std::string::npos && text[first] == '{');
  std::istringstream stream(text);
  const auto base = path.parent_path();
  try {
    return jsonl ? parse_manifest_jsonl(stream, base) : parse_manifest_csv(stream, base);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

}  // namespace agekit
