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

// Seeded synthetic evaluation corpus: speech-like clean utterances with frame
// labels, noisy versions over an SNR grid, a toy acoustic model trained on
// the clean features and a surrogate WER (frame error rate of that model on
// each degraded utterance).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "agekit/am.hpp"
#include "agekit/detail/format.hpp"
#include "agekit/error.hpp"
#include "agekit/feature_io.hpp"
#include "agekit/features.hpp"
#include "agekit/mix.hpp"
#include "agekit/model_io.hpp"
#include "agekit/train.hpp"
#include "agekit/wav.hpp"

namespace agekit {

struct FixtureConfig {
  std::uint64_t seed = 1;
  std::vector<double> snr_grid{-5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
  int n_utterances = 20;
  int sample_rate_hz = 16000;
  FrameSpec frame;
  MelSpec mel;
  ToyArchitecture arch{{32}, Activation::kSigmoid, 2, 2, 0};
  double learning_rate = 1.0;
  int epochs = 300;
};

struct FixtureResult {
  std::filesystem::path manifest_path;
  std::filesystem::path model_path;
  std::filesystem::path train_features_path;
  std::filesystem::path train_labels_path;
  std::size_t n_entries = 0;
};

// Labelled synthetic utterance; label 0 is silence, 1..5 voiced vowels with
// distinct formant pairs, 6 a fricative.
struct SyntheticUtterance {
  Waveform audio;
  std::vector<int> sample_labels;
};

inline constexpr int kFixtureClasses = 7;

namespace fixture_detail {

struct Formants {
  double f1;
  double f2;
};

inline constexpr std::array<Formants, 5> kVowels{{
    {700.0, 1200.0}, {300.0, 2300.0}, {320.0, 800.0}, {500.0, 1900.0}, {500.0, 900.0}}};

inline double formant_gain(double hz, const Formants& f) {
  auto peak = [](double x, double center, double bw) {
    const double d = (x - center) / bw;
    return 1.0 / (1.0 + d * d);
  };
  return peak(hz, f.f1, 90.0) + 0.7 * peak(hz, f.f2, 140.0) + 0.02;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace fixture_detail

inline SyntheticUtterance synthesize_utterance(std::mt19937_64& rng, int sample_rate_hz) {
  using namespace fixture_detail;
  const double fs = sample_rate_hz;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double f0_start = uniform(rng, 100.0, 220.0);
  const double f0_end = f0_start * uniform(rng, 0.9, 1.1);
  const double level = uniform(rng, 0.05, 0.2);

  SyntheticUtterance utt;
  utt.audio.sample_rate_hz = sample_rate_hz;
  auto& x = utt.audio.samples;
  auto& labels = utt.sample_labels;

  auto append_silence = [&](double seconds) {
    const auto n = static_cast<std::size_t>(seconds * fs);
    x.insert(x.end(), n, 0.0);
    labels.insert(labels.end(), n, 0);
  };

  append_silence(uniform(rng, 0.15, 0.3));
  const int n_segments = std::uniform_int_distribution<int>(8, 12)(rng);
  double phase0 = 0.0;
  for (int s = 0; s < n_segments; ++s) {
    const int cls = std::uniform_int_distribution<int>(1, kFixtureClasses - 1)(rng);
    const auto n = static_cast<std::size_t>(uniform(rng, 0.08, 0.2) * fs);
    const std::size_t start = x.size();
    std::vector<double> seg(n, 0.0);
    if (cls <= static_cast<int>(kVowels.size())) {
      const Formants& f = kVowels[static_cast<std::size_t>(cls - 1)];
      double phase = phase0;
      for (std::size_t t = 0; t < n; ++t) {
        const double progress = static_cast<double>(start + t) / (2.5 * fs);
        const double f0 = f0_start + (f0_end - f0_start) * std::min(progress, 1.0);
        phase += 2.0 * std::numbers::pi * f0 / fs;
        double v = 0.0;
        for (int h = 1; h * f0 < 0.45 * fs; ++h) {
          v += formant_gain(h * f0, f) * std::sin(h * phase) / std::sqrt(static_cast<double>(h));
        }
        seg[t] = v;
      }
      phase0 = std::fmod(phase, 2.0 * std::numbers::pi);
    } else {
      // Twice-differenced white noise: energy concentrated at high frequencies.
      double p1 = 0.0, p2 = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double w = gauss(rng);
        seg[t] = w - 2.0 * p1 + p2;
        p2 = p1;
        p1 = w;
      }
    }
    double rms = std::sqrt(mean_power(seg));
    const double seg_level = level * uniform(rng, 0.6, 1.4) / std::max(rms, 1e-12);
    const double ramp = 0.01 * fs;
    const double mod_rate = uniform(rng, 3.0, 6.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double td = static_cast<double>(t);
      const double edge = std::min({1.0, td / ramp, (static_cast<double>(n) - td) / ramp});
      const double env = 0.5 - 0.5 * std::cos(std::numbers::pi * edge);
      const double am = 1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * mod_rate * td / fs);
      x.push_back(seg[t] * seg_level * env * am);
      labels.push_back(cls);
    }
    if (uniform(rng, 0.0, 1.0) < 0.25) append_silence(uniform(rng, 0.05, 0.15));
  }
  append_silence(uniform(rng, 0.15, 0.3));

  // Low background floor so no region is digital silence.
  for (double& v : x) v += 3e-4 * gauss(rng);
  return utt;
}

// Stationary noise with a low-frequency tilt (one-pole smoothed white noise).
inline Waveform synthesize_noise(std::mt19937_64& rng, int sample_rate_hz, double seconds) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Waveform w;
  w.sample_rate_hz = sample_rate_hz;
  w.samples.resize(static_cast<std::size_t>(seconds * sample_rate_hz));
  double state = 0.0;
  for (double& v : w.samples) {
    state = 0.7 * state + gauss(rng);
    v = 0.05 * state;
  }
  return w;
}

// Label of the sample at each frame's center.
inline std::vector<int> frame_labels(const std::vector<int>& sample_labels, int sample_rate_hz,
                                     const FrameSpec& spec) {
  const int len = spec.frame_samples(sample_rate_hz);
  const int shift = spec.shift_samples(sample_rate_hz);
  const std::size_t n = frame_count(sample_labels.size(), len, shift);
  std::vector<int> out(n);
  for (std::size_t f = 0; f < n; ++f) {
    out[f] = sample_labels[f * static_cast<std::size_t>(shift) + static_cast<std::size_t>(len / 2)];
  }
  return out;
}

inline FeatureMatrix fixture_features(const Waveform& w, const FixtureConfig& cfg) {
  return mvn(fbank(w, cfg.frame, cfg.mel));
}

inline FixtureResult make_fixture_corpus(const std::filesystem::path& out_dir,
                                         const FixtureConfig& cfg = {}) {
  if (cfg.n_utterances <= 0) throw Error(ErrorCode::kInvalidArgument, "need at least one utterance");
  if (cfg.snr_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty SNR grid");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "clean", ec);
  fs::create_directories(out_dir / "noisy", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  std::mt19937_64 speech_rng(cfg.seed);
  std::mt19937_64 noise_rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
  const Waveform noise = synthesize_noise(noise_rng, cfg.sample_rate_hz, 10.0);
  save_wav(noise, out_dir / "noise.wav");

  // Clean utterances; features come from the written (quantized) audio so
  // they match what the scorer will read back.
  std::vector<std::string> names;
  std::vector<Waveform> clean;
  std::vector<std::vector<int>> labels;
  Matrix train_values;
  std::vector<int> train_labels;
  for (int u = 0; u < cfg.n_utterances; ++u) {
    SyntheticUtterance utt = synthesize_utterance(speech_rng, cfg.sample_rate_hz);
    char name[32];
    std::snprintf(name, sizeof(name), "utt%03d", u);
    names.emplace_back(name);
    const fs::path path = out_dir / "clean" / (names.back() + ".wav");
    save_wav(utt.audio, path);
    clean.push_back(load_wav(path));
    labels.push_back(frame_labels(utt.sample_labels, cfg.sample_rate_hz, cfg.frame));

    const FeatureMatrix f = fixture_features(clean.back(), cfg);
    const Eigen::Index old_rows = train_values.rows();
    train_values.conservativeResize(old_rows + f.frames(), f.dim());
    train_values.bottomRows(f.frames()) = f.values;
    train_labels.insert(train_labels.end(), labels.back().begin(), labels.back().end());
  }

  // Train from float32-rounded features so `train-toy` on the exported file
  // reproduces the model exactly.
  FeatureMatrix train{train_values.cast<float>().cast<double>(), FeatureKind::kFbank,
                      cfg.frame.frame_shift_ms};
  FixtureResult result;
  result.train_features_path = out_dir / "train_features.agef";
  result.train_labels_path = out_dir / "train_labels.txt";
  save_agef(train, result.train_features_path);
  {
    std::string text;
    for (int l : train_labels) text += std::to_string(l) + "\n";
    detail::write_file_bytes(result.train_labels_path, text);
  }

  ToyArchitecture arch = cfg.arch;
  arch.n_classes = kFixtureClasses;
  ToyHyperParams hyper{cfg.learning_rate, cfg.epochs, cfg.seed};
  const AcousticModel model = train_toy(train, train_labels, arch, hyper);
  result.model_path = out_dir / "model.json";
  save_model(model, result.model_path);

  std::string manifest = "utt_id,clean_path,degraded_path,wer,condition,noise_type,se_algo,snr_db\n";
  std::uniform_int_distribution<std::size_t> offset_dist(0, noise.size() - 1);
  for (int u = 0; u < cfg.n_utterances; ++u) {
    const auto ui = static_cast<std::size_t>(u);
    for (double snr : cfg.snr_grid) {
      const std::string snr_text = detail::format_double(snr);
      const std::string id = names[ui] + "_snr" + snr_text;
      const fs::path rel = fs::path("noisy") / (id + ".wav");
      save_wav(mix_at_snr(clean[ui], noise, snr, offset_dist(noise_rng)), out_dir / rel);

      const PosteriorMatrix post = forward(model, fixture_features(load_wav(out_dir / rel), cfg));
      std::vector<int> lab = labels[ui];
      lab.resize(static_cast<std::size_t>(post.frames()));
      const double wer = 100.0 * frame_error_rate(post, lab);

      manifest += id + "," + (fs::path("clean") / (names[ui] + ".wav")).string() + "," +
                  rel.string() + "," + detail::format_double(wer) + ",clean,synthetic,noisy," +
                  snr_text + "\n";
      ++result.n_entries;
    }
  }
  result.manifest_path = out_dir / "manifest.csv";
  detail::write_file_bytes(result.manifest_path, manifest);
  return result;
}

}  // namespace agekit
