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

// Batch scoring of manifest corpora, per-group correlation against WER and
// report emission.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "agekit/am.hpp"
#include "agekit/detail/format.hpp"
#include "agekit/error.hpp"
#include "agekit/features.hpp"
#include "agekit/manifest.hpp"
#include "agekit/measures.hpp"
#include "agekit/stats.hpp"
#include "agekit/stoi.hpp"
#include "agekit/wav.hpp"

namespace agekit {

struct RunConfig {
  FrameSpec frame;
  MelSpec mel;
  FeatureKind feature_kind = FeatureKind::kFbank;
  std::vector<MeasureKind> measures{MeasureKind::kAge, MeasureKind::kEntropy, MeasureKind::kStoi};
  double alignment_tolerance = 0.02;
  int channel = 0;
  int workers = 1;
};

struct ScoreRow {
  std::string utt_id;
  std::map<std::string, double> values;  // measure name -> score
  std::optional<double> wer_percent;
  std::map<std::string, std::string> tags;
  std::size_t n_frames_used = 0;

  bool operator==(const ScoreRow&) const = default;
};

struct SkippedRow {
  std::string utt_id;
  std::string reason;
};

struct BatchResult {
  std::vector<ScoreRow> rows;        // manifest order
  std::vector<SkippedRow> skipped;   // manifest order
};

inline bool needs_model(const RunConfig& cfg) {
  return std::any_of(cfg.measures.begin(), cfg.measures.end(), [](MeasureKind k) {
    return k == MeasureKind::kAge || k == MeasureKind::kEntropy;
  });
}

// Fatal (kConfig) when the model cannot consume the configured features.
inline void check_config(const RunConfig& cfg, const AcousticModel* model) {
  if (cfg.measures.empty()) throw Error(ErrorCode::kConfig, "no measures selected");
  if (!(cfg.alignment_tolerance >= 0.0)) {
    throw Error(ErrorCode::kConfig, "alignment tolerance must be non-negative");
  }
  if (!needs_model(cfg)) return;
  if (model == nullptr) throw Error(ErrorCode::kConfig, "age/entropy need an acoustic model");
  const int dim = feature_dim(cfg.feature_kind, cfg.mel);
  if (dim != model->input_dim && dim != model->spliced_dim()) {
    throw Error(ErrorCode::kConfig, "feature dim " + std::to_string(dim) +
                                        " does not match model input_dim " +
                                        std::to_string(model->input_dim));
  }
}

// Runs the full pipeline for one clean/degraded pair: features -> mvn ->
// acoustic model -> posterior pair -> AGE / entropy; STOI on the waveforms.
inline ScoreRow score_utterance(const ManifestEntry& entry, const AcousticModel* model,
                                const RunConfig& cfg) {
  check_config(cfg, model);
  const Waveform clean = load_wav(entry.clean_path, cfg.channel);
  const Waveform degraded = load_wav(entry.degraded_path, cfg.channel);
  if (clean.sample_rate_hz != degraded.sample_rate_hz) {
    throw Error(ErrorCode::kRateMismatch, "clean and degraded sample rates differ");
  }

  ScoreRow row;
  row.utt_id = entry.utt_id;
  row.wer_percent = entry.wer_percent;
  row.tags = entry.tags;

  if (needs_model(cfg)) {
    const FeatureMatrix fc = mvn(extract_features(clean, cfg.feature_kind, cfg.frame, cfg.mel));
    const FeatureMatrix fd = mvn(extract_features(degraded, cfg.feature_kind, cfg.frame, cfg.mel));
    const Eigen::Index nc = fc.frames();
    const Eigen::Index nd = fd.frames();
    const Eigen::Index n = std::min(nc, nd);
    const double rel = static_cast<double>(std::max(nc, nd) - n) / static_cast<double>(std::max(nc, nd));
    if (rel > cfg.alignment_tolerance) {
      throw Error(ErrorCode::kAlignment, "frame counts " + std::to_string(nc) + " and " +
                                             std::to_string(nd) + " differ beyond tolerance");
    }
    const PosteriorMatrix pc = forward(*model, fc).head(n);
    const PosteriorMatrix pd = forward(*model, fd).head(n);
    row.n_frames_used = static_cast<std::size_t>(n);
    for (MeasureKind k : cfg.measures) {
      if (k == MeasureKind::kAge) row.values["age"] = age(pc, pd).value;
      if (k == MeasureKind::kEntropy) row.values["entropy"] = entropy_confidence(pd).value;
    }
  }
  if (std::find(cfg.measures.begin(), cfg.measures.end(), MeasureKind::kStoi) != cfg.measures.end()) {
    StoiParams sp;
    sp.length_tolerance = cfg.alignment_tolerance;
    row.values["stoi"] = stoi(clean, degraded, sp).value;
  }
  return row;
}

// Scores every entry with `cfg.workers` threads. Per-row failures are
// recorded as skips; configuration errors abort the run.
inline BatchResult score_corpus(const std::vector<ManifestEntry>& entries,
                                const AcousticModel* model, const RunConfig& cfg) {
  check_config(cfg, model);
  const std::size_t n = entries.size();
  std::vector<std::optional<ScoreRow>> results(n);
  std::vector<std::string> reasons(n);
  std::vector<std::exception_ptr> fatal(n);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = score_utterance(entries[i], model, cfg);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kConfig) {
          fatal[i] = std::current_exception();
        } else {
          reasons[i] = e.what();
        }
      } catch (const std::exception& e) {
        reasons[i] = e.what();
      }
    }
  };

  const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (const auto& f : fatal) {
    if (f) std::rethrow_exception(f);
  }
  BatchResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) {
      out.rows.push_back(std::move(*results[i]));
    } else {
      out.skipped.push_back({entries[i].utt_id, reasons[i]});
    }
  }
  return out;
}

inline constexpr const char* kDefaultGroup = "all";
inline constexpr const char* kMissingTagGroup = "(none)";

inline std::string group_of(const ScoreRow& row, const std::optional<std::string>& group_key) {
  if (!group_key) return kDefaultGroup;
  auto it = row.tags.find(*group_key);
  return it == row.tags.end() || it->second.empty() ? kMissingTagGroup : it->second;
}

struct SkippedGroup {
  std::string group;
  std::string measure;
  std::string reason;
};

struct GroupedReport {
  std::optional<std::string> group_key;
  std::map<std::string, std::map<std::string, CorrelationReport>> groups;
  std::vector<SkippedGroup> skipped;
};

// evaluate_measure per (group, measure). Groups with fewer than three WER
// points or degenerate data are listed as skipped.
inline GroupedReport correlate_by_group(const std::vector<ScoreRow>& rows,
                                        const std::optional<std::string>& group_key) {
  std::set<std::string> measures;
  std::map<std::string, std::vector<const ScoreRow*>> members;
  for (const ScoreRow& r : rows) {
    for (const auto& [name, v] : r.values) measures.insert(name);
    members[group_of(r, group_key)].push_back(&r);
  }

  GroupedReport rep;
  rep.group_key = group_key;
  for (const auto& [group, list] : members) {
    for (const std::string& measure : measures) {
      std::vector<double> m;
      std::vector<double> wer;
      for (const ScoreRow* r : list) {
        auto it = r->values.find(measure);
        if (it == r->values.end() || !r->wer_percent) continue;
        m.push_back(it->second);
        wer.push_back(*r->wer_percent);
      }
      if (m.size() < 3) {
        rep.skipped.push_back({group, measure, "only " + std::to_string(m.size()) +
                                                   " rows with a WER (need 3)"});
        continue;
      }
      try {
        rep.groups[group][measure] = evaluate_measure(m, wer, measure);
      } catch (const Error& e) {
        rep.skipped.push_back({group, measure, e.what()});
      }
    }
  }
  if (rep.groups.empty()) {
    throw Error(ErrorCode::kEmptyReport, "no group has enough scored rows with WER");
  }
  return rep;
}

namespace harness_detail {

inline std::vector<std::string> measure_columns(const std::vector<ScoreRow>& rows) {
  std::set<std::string> names;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.values) names.insert(k);
  }
  return {names.begin(), names.end()};
}

inline std::vector<std::string> tag_columns(const std::vector<ScoreRow>& rows) {
  std::set<std::string> names;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.tags) names.insert(k);
  }
  return {names.begin(), names.end()};
}

inline nlohmann::ordered_json number_or_null(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace harness_detail

// scores.csv: utt_id, wer, one column per measure, one column per tag.
inline std::string format_scores_csv(const std::vector<ScoreRow>& rows) {
  const auto measures = harness_detail::measure_columns(rows);
  const auto tags = harness_detail::tag_columns(rows);
  std::string out = "utt_id,wer";
  for (const auto& m : measures) out += "," + detail::csv_escape(m);
  for (const auto& t : tags) out += "," + detail::csv_escape(t);
  out += '\n';
  for (const auto& r : rows) {
    out += detail::csv_escape(r.utt_id);
    out += ',';
    if (r.wer_percent) out += detail::format_double(*r.wer_percent);
    for (const auto& m : measures) {
      out += ',';
      if (auto it = r.values.find(m); it != r.values.end()) out += detail::format_double(it->second);
    }
    for (const auto& t : tags) {
      out += ',';
      if (auto it = r.tags.find(t); it != r.tags.end()) out += detail::csv_escape(it->second);
    }
    out += '\n';
  }
  return out;
}

// Inverse of format_scores_csv. Columns named after a known measure are
// scores; everything after utt_id and wer that is not a measure is a tag.
inline std::vector<ScoreRow> parse_scores_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyInput, "scores file is empty");
  std::vector<std::string> header = detail::split_csv_line(line);
  for (auto& h : header) h = std::string(detail::trim(h));
  if (header.size() < 2 || header[0] != "utt_id" || header[1] != "wer") {
    throw Error(ErrorCode::kMissingColumn, "scores header must start with utt_id,wer");
  }
  std::vector<bool> is_measure(header.size(), false);
  for (std::size_t i = 2; i < header.size(); ++i) {
    for (MeasureKind k : kAllMeasures) is_measure[i] = is_measure[i] || header[i] == to_string(k);
  }

  std::vector<ScoreRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != header.size()) throw Error(ErrorCode::kParse, where + ": wrong field count");
    ScoreRow r;
    r.utt_id = fields[0];
    if (!detail::trim(fields[1]).empty()) {
      r.wer_percent = detail::parse_double(fields[1]);
      if (!r.wer_percent) throw Error(ErrorCode::kParse, where + ": unreadable wer");
    }
    for (std::size_t i = 2; i < header.size(); ++i) {
      if (is_measure[i]) {
        if (detail::trim(fields[i]).empty()) continue;
        auto v = detail::parse_double(fields[i]);
        if (!v) throw Error(ErrorCode::kParse, where + ": unreadable " + header[i]);
        r.values[header[i]] = *v;
      } else if (!fields[i].empty()) {
        r.tags[header[i]] = fields[i];
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ScoreRow> load_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return parse_scores_csv(in);
}

// report.json: per-group unweighted means of each measure and of WER, the
// per-group per-measure correlation reports and the skip ledger.
inline nlohmann::ordered_json report_to_json(const std::vector<ScoreRow>& rows,
                                             const GroupedReport& report,
                                             const std::vector<SkippedRow>& skipped_rows) {
  nlohmann::ordered_json j;
  j["group_by"] = report.group_key ? nlohmann::ordered_json(*report.group_key) : nlohmann::ordered_json(nullptr);

  std::map<std::string, std::vector<const ScoreRow*>> members;
  for (const ScoreRow& r : rows) members[group_of(r, report.group_key)].push_back(&r);
  const auto measures = harness_detail::measure_columns(rows);

  j["means"] = nlohmann::ordered_json::array();
  for (const auto& [group, list] : members) {
    nlohmann::ordered_json block;
    block["group"] = group;
    block["n_rows"] = list.size();
    for (const auto& m : measures) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const ScoreRow* r : list) {
        if (auto it = r->values.find(m); it != r->values.end()) {
          sum += it->second;
          ++count;
        }
      }
      block[m + "_mean"] = harness_detail::number_or_null(
          count ? std::optional<double>(sum / static_cast<double>(count)) : std::nullopt);
    }
    double wsum = 0.0;
    std::size_t wcount = 0;
    for (const ScoreRow* r : list) {
      if (r->wer_percent) {
        wsum += *r->wer_percent;
        ++wcount;
      }
    }
    block["wer_mean"] = harness_detail::number_or_null(
        wcount ? std::optional<double>(wsum / static_cast<double>(wcount)) : std::nullopt);
    j["means"].push_back(std::move(block));
  }

  j["correlations"] = nlohmann::ordered_json::array();
  for (const auto& [group, by_measure] : report.groups) {
    for (const auto& [measure, c] : by_measure) {
      nlohmann::ordered_json e;
      e["group"] = group;
      e["measure"] = measure;
      e["n_points"] = c.n_points;
      e["a"] = c.params.a;
      e["b"] = c.params.b;
      e["rho_magnitude"] = c.rho_magnitude;
      e["rho_signed"] = c.rho_signed;
      e["spearman"] = c.spearman;
      e["rmse_mapped"] = c.rmse_mapped;
      j["correlations"].push_back(std::move(e));
    }
  }

  j["skipped_groups"] = nlohmann::ordered_json::array();
  for (const auto& s : report.skipped) {
    j["skipped_groups"].push_back({{"group", s.group}, {"measure", s.measure}, {"reason", s.reason}});
  }
  j["skipped_rows"] = nlohmann::ordered_json::array();
  for (const auto& s : skipped_rows) {
    j["skipped_rows"].push_back({{"utt_id", s.utt_id}, {"reason", s.reason}});
  }
  return j;
}

// Columns m, wer, f_m (the group's fitted logistic), group.
inline std::string format_scatter_csv(const std::vector<ScoreRow>& rows,
                                      const GroupedReport& report, const std::string& measure) {
  std::string out = "m,wer,f_m,group\n";
  for (const ScoreRow& r : rows) {
    auto it = r.values.find(measure);
    if (it == r.values.end() || !r.wer_percent) continue;
    const std::string group = group_of(r, report.group_key);
    auto g = report.groups.find(group);
    if (g == report.groups.end()) continue;
    auto c = g->second.find(measure);
    if (c == g->second.end()) continue;
    out += detail::format_double(it->second) + "," + detail::format_double(*r.wer_percent) + "," +
           detail::format_double(map_logistic(c->second.params, it->second)) + "," +
           detail::csv_escape(group) + "\n";
  }
  return out;
}

// Writes scores.csv, report.json, scatter_<measure>.csv and skipped.csv.
inline void emit_report(const std::vector<ScoreRow>& rows, const GroupedReport& report,
                        const std::vector<SkippedRow>& skipped_rows,
                        const std::filesystem::path& out_dir) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "no scored rows to report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  harness_detail::write_text(out_dir / "scores.csv", format_scores_csv(rows));
  harness_detail::write_text(out_dir / "report.json",
                             report_to_json(rows, report, skipped_rows).dump(2) + "\n");
  for (const auto& m : harness_detail::measure_columns(rows)) {
    harness_detail::write_text(out_dir / ("scatter_" + m + ".csv"),
                               format_scatter_csv(rows, report, m));
  }
  std::string skipped = "utt_id,reason\n";
  for (const auto& s : skipped_rows) {
    skipped += detail::csv_escape(s.utt_id) + "," + detail::csv_escape(s.reason) + "\n";
  }
  harness_detail::write_text(out_dir / "skipped.csv", skipped);
}

}  // namespace agekit
