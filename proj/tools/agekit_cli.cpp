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

// Command-line front end. Exit status: 0 on success, 1 on a fatal error,
// 2 when scoring finished but some rows were skipped.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "agekit/agekit.hpp"

namespace {

namespace fs = std::filesystem;
using namespace agekit;

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitSkipped = 2;

struct SignalFlags {
  FrameSpec frame;
  MelSpec mel;
  std::string window = "hamming";
};

void add_signal_flags(CLI::App* cmd, SignalFlags& s) {
  cmd->add_option("--frame-length-ms", s.frame.frame_length_ms, "Frame length")->capture_default_str();
  cmd->add_option("--frame-shift-ms", s.frame.frame_shift_ms, "Frame shift")->capture_default_str();
  cmd->add_option("--window", s.window, "hamming, hann or rectangular")->capture_default_str();
  cmd->add_option("--preemphasis", s.frame.preemphasis, "Pre-emphasis coefficient")->capture_default_str();
  cmd->add_option("--fft-size", s.frame.fft_size, "FFT length")->capture_default_str();
  cmd->add_option("--num-filters", s.mel.n_filters, "Mel filters")->capture_default_str();
  cmd->add_option("--low-freq", s.mel.low_freq_hz, "Lowest mel edge in Hz")->capture_default_str();
  cmd->add_option("--high-freq", s.mel.high_freq_hz, "Highest mel edge in Hz, <= 0 for Nyquist")
      ->capture_default_str();
  cmd->add_option("--num-ceps", s.mel.n_cepstra, "Cepstra kept by mfcc")->capture_default_str();
}

void finish(SignalFlags& s) { s.frame.window = window_kind_from_string(s.window); }

std::vector<MeasureKind> parse_measures(const std::vector<std::string>& names) {
  std::vector<MeasureKind> out;
  for (const auto& n : names) {
    MeasureKind k = measure_from_string(n);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

std::optional<std::string> group_key(const std::string& s) {
  if (s.empty() || s == "none") return std::nullopt;
  return s;
}

int run_score(const std::string& manifest, const std::string& model_path,
              const std::vector<std::string>& measure_names, const std::string& out_dir,
              const std::string& kind, const std::string& group_by, RunConfig cfg) {
  cfg.measures = parse_measures(measure_names);
  cfg.feature_kind = feature_kind_from_string(kind);
  std::optional<AcousticModel> model;
  if (needs_model(cfg)) {
    if (model_path.empty()) throw Error(ErrorCode::kConfig, "--model is required for age/entropy");
    model = load_model(model_path);
  }
  const auto entries = load_manifest(manifest);
  BatchResult res = score_corpus(entries, model ? &*model : nullptr, cfg);
  for (const auto& s : res.skipped) std::cerr << "skipped " << s.utt_id << ": " << s.reason << "\n";
  if (res.rows.empty()) throw Error(ErrorCode::kEmptyReport, "every row was skipped");

  GroupedReport report;
  report.group_key = group_key(group_by);
  try {
    report = correlate_by_group(res.rows, report.group_key);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyReport) throw;
    std::cerr << "note: " << e.message() << "; writing scores without correlations\n";
  }
  emit_report(res.rows, report, res.skipped, out_dir);
  std::cout << "scored " << res.rows.size() << " of " << entries.size() << " rows -> "
            << out_dir << "\n";
  return res.skipped.empty() ? kExitOk : kExitSkipped;
}

int run(int argc, char** argv) {
  CLI::App app{"Acoustics-guided evaluation of speech enhancement"};
  app.require_subcommand(1);

  // mix
  std::string clean, noise, out;
  double snr = 0.0;
  std::size_t offset = 0;
  auto* mix = app.add_subcommand("mix", "Mix clean speech with noise at a target SNR");
  mix->add_option("--clean", clean, "Clean WAV")->required();
  mix->add_option("--noise", noise, "Noise WAV")->required();
  mix->add_option("--snr", snr, "Target SNR in dB")->required();
  mix->add_option("--offset", offset, "Start sample in the noise (wraps around)")->capture_default_str();
  mix->add_option("--out", out, "Output WAV")->required();

  // features
  std::string in, kind = "fbank";
  SignalFlags feat_flags;
  auto* features = app.add_subcommand("features", "Extract FBANK or MFCC features");
  features->add_option("--in", in, "Input WAV")->required();
  features->add_option("--kind", kind, "fbank or mfcc")->capture_default_str();
  features->add_option("--out", out, "Output (.csv for text, anything else binary AGEF)")->required();
  add_signal_flags(features, feat_flags);

  // score
  std::string manifest, model_path, group_by = "none";
  std::vector<std::string> measure_names{"age", "entropy", "stoi"};
  RunConfig run_cfg;
  run_cfg.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  SignalFlags score_flags;
  auto* score = app.add_subcommand("score", "Score a manifest and write a report");
  score->add_option("--manifest", manifest, "CSV or JSON-lines manifest")->required();
  score->add_option("--model", model_path, "Acoustic model JSON");
  score->add_option("--measures", measure_names, "age, entropy, stoi")->delimiter(',')->capture_default_str();
  score->add_option("--out", out, "Output directory")->required();
  score->add_option("--tolerance", run_cfg.alignment_tolerance, "Relative length mismatch allowed")
      ->capture_default_str();
  score->add_option("--workers", run_cfg.workers, "Worker threads")->capture_default_str();
  score->add_option("--group-by", group_by, "Tag to group correlations by, or none")->capture_default_str();
  score->add_option("--feature-kind", kind, "fbank or mfcc")->capture_default_str();
  score->add_option("--channel", run_cfg.channel, "WAV channel")->capture_default_str();
  add_signal_flags(score, score_flags);

  // correlate
  std::string scores;
  auto* correlate = app.add_subcommand("correlate", "Fit and correlate measures against WER");
  correlate->add_option("--scores", scores, "scores.csv")->required();
  correlate->add_option("--group-by", group_by, "Tag name or none")->capture_default_str();
  correlate->add_option("--out", out, "report.json")->required();

  // fixture
  FixtureConfig fix;
  auto* fixture = app.add_subcommand("fixture", "Generate the synthetic evaluation corpus");
  fixture->add_option("--out", out, "Output directory")->required();
  fixture->add_option("--seed", fix.seed, "Random seed")->capture_default_str();
  fixture->add_option("--snrs", fix.snr_grid, "Comma-separated SNRs in dB")
      ->delimiter(',')
      ->capture_default_str();
  fixture->add_option("--utts", fix.n_utterances, "Clean utterances")->capture_default_str();
  fixture->add_option("--epochs", fix.epochs, "Toy model training epochs")->capture_default_str();

  // train-toy
  std::string feats_path, labels_path, activation = "sigmoid";
  std::vector<int> hidden{16};
  ToyHyperParams hyper;
  int context = 0;
  auto* train = app.add_subcommand("train-toy", "Train a small feed-forward acoustic model");
  train->add_option("--features", feats_path, "AGEF feature file")->required();
  train->add_option("--labels", labels_path, "One integer label per line")->required();
  train->add_option("--hidden", hidden, "Hidden layer widths, comma-separated")
      ->delimiter(',')
      ->capture_default_str();
  train->add_option("--activation", activation, "sigmoid, tanh or relu")->capture_default_str();
  train->add_option("--context", context, "Frames of context on each side")->capture_default_str();
  train->add_option("--epochs", hyper.epochs, "Full-batch epochs")->capture_default_str();
  train->add_option("--lr", hyper.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--seed", hyper.seed, "Initialization seed")->capture_default_str();
  train->add_option("--out", out, "Model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFatal;
  }

  if (*mix) {
    save_wav(mix_at_snr(load_wav(clean), load_wav(noise), snr, offset), out);
  } else if (*features) {
    finish(feat_flags);
    FeatureMatrix f = extract_features(load_wav(in), feature_kind_from_string(kind),
                                       feat_flags.frame, feat_flags.mel);
    if (fs::path(out).extension() == ".csv") {
      save_feature_csv(f, out);
    } else {
      save_agef(f, out);
    }
    std::cout << f.frames() << " frames x " << f.dim() << " dims -> " << out << "\n";
  } else if (*score) {
    finish(score_flags);
    run_cfg.frame = score_flags.frame;
    run_cfg.mel = score_flags.mel;
    return run_score(manifest, model_path, measure_names, out, kind, group_by, run_cfg);
  } else if (*correlate) {
    const auto rows = load_scores_csv(scores);
    const GroupedReport report = correlate_by_group(rows, group_key(group_by));
    const fs::path dest(out);
    if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
    detail::write_file_bytes(dest, report_to_json(rows, report, {}).dump(2) + "\n");
    for (const auto& s : report.skipped) {
      std::cerr << "skipped group " << s.group << "/" << s.measure << ": " << s.reason << "\n";
    }
  } else if (*fixture) {
    FixtureResult r = make_fixture_corpus(out, fix);
    std::cout << r.n_entries << " entries -> " << r.manifest_path.string() << "\n";
  } else if (*train) {
    ToyArchitecture arch;
    arch.hidden_dims = hidden;
    arch.hidden_activation = activation_from_string(activation);
    arch.left_context = context;
    arch.right_context = context;
    std::vector<double> history;
    AcousticModel m = train_toy(load_agef(feats_path), load_labels(labels_path), arch, hyper, &history);
    save_model(m, out);
    std::cout << "loss " << history.front() << " -> " << history.back() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const agekit::Error& e) {
    std::cerr << "agekit: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "agekit: " << e.what() << "\n";
  }
  return kExitFatal;
}
