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

// Low-level speech representations: framing, log-mel filterbank (FBANK),
// MFCC, context splicing and per-utterance mean/variance normalization.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "agekit/error.hpp"
#include "agekit/waveform.hpp"

namespace agekit {

enum class WindowKind { kHamming, kHann, kRectangular };
enum class FeatureKind { kFbank, kMfcc, kSpliced };

inline std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kFbank: return "fbank";
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kSpliced: return "spliced";
  }
  return "unknown";
}

inline FeatureKind feature_kind_from_string(std::string_view s) {
  if (s == "fbank") return FeatureKind::kFbank;
  if (s == "mfcc") return FeatureKind::kMfcc;
  if (s == "spliced") return FeatureKind::kSpliced;
  throw Error(ErrorCode::kInvalidArgument, "unknown feature kind '" + std::string(s) + "'");
}

inline WindowKind window_kind_from_string(std::string_view s) {
  if (s == "hamming") return WindowKind::kHamming;
  if (s == "hann") return WindowKind::kHann;
  if (s == "rectangular") return WindowKind::kRectangular;
  throw Error(ErrorCode::kInvalidArgument, "unknown window '" + std::string(s) + "'");
}

struct FrameSpec {
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  WindowKind window = WindowKind::kHamming;
  double preemphasis = 0.97;
  int fft_size = 512;

  int frame_samples(int sample_rate_hz) const {
    return static_cast<int>(std::lround(frame_length_ms * sample_rate_hz / 1000.0));
  }
  int shift_samples(int sample_rate_hz) const {
    return static_cast<int>(std::lround(frame_shift_ms * sample_rate_hz / 1000.0));
  }
};

struct MelSpec {
  int n_filters = 40;
  double low_freq_hz = 20.0;
  double high_freq_hz = 0.0;  // <= 0 means Nyquist
  int n_cepstra = 13;

  double upper(int sample_rate_hz) const {
    return high_freq_hz > 0.0 ? high_freq_hz : sample_rate_hz / 2.0;
  }
};

struct FeatureMatrix {
  Matrix values;
  FeatureKind kind = FeatureKind::kFbank;
  double frame_shift_ms = 10.0;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

// Filterbank energy floor applied before the log.
inline constexpr double kLogFloor = 1e-10;

inline void validate(const FrameSpec& spec, int sample_rate_hz) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::kInvalidArgument, why); };
  if (sample_rate_hz <= 0) bad("sample rate must be positive");
  if (!(spec.frame_length_ms > 0.0) || !(spec.frame_shift_ms > 0.0)) {
    bad("frame length and shift must be positive");
  }
  if (spec.frame_shift_ms > spec.frame_length_ms) bad("frame shift exceeds frame length");
  if (!(spec.preemphasis >= 0.0 && spec.preemphasis < 1.0)) bad("preemphasis must be in [0,1)");
  if (spec.fft_size <= 0 || (spec.fft_size & (spec.fft_size - 1)) != 0) {
    bad("fft_size must be a positive power of two");
  }
  const int len = spec.frame_samples(sample_rate_hz);
  if (len < 1 || spec.shift_samples(sample_rate_hz) < 1) bad("frame shorter than one sample");
  if (spec.fft_size < len) {
    bad("fft_size " + std::to_string(spec.fft_size) + " smaller than frame of " +
        std::to_string(len) + " samples");
  }
}

inline void validate(const MelSpec& spec, int sample_rate_hz) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::kInvalidArgument, why); };
  if (spec.n_filters <= 0) bad("n_filters must be positive");
  if (spec.n_cepstra <= 0 || spec.n_cepstra > spec.n_filters) bad("n_cepstra must be in [1, n_filters]");
  const double hi = spec.upper(sample_rate_hz);
  if (!(spec.low_freq_hz >= 0.0) || !(spec.low_freq_hz < hi) || hi > sample_rate_hz / 2.0) {
    bad("mel band edges must satisfy 0 <= low < high <= sample_rate/2");
  }
}

inline std::size_t frame_count(std::size_t n_samples, int frame_len, int shift) {
  if (n_samples < static_cast<std::size_t>(frame_len)) return 0;
  return 1 + (n_samples - static_cast<std::size_t>(frame_len)) / static_cast<std::size_t>(shift);
}

inline std::vector<double> make_window(WindowKind kind, int length) {
  std::vector<double> w(static_cast<std::size_t>(length), 1.0);
  if (length == 1 || kind == WindowKind::kRectangular) return w;
  const double denom = length - 1;
  for (int n = 0; n < length; ++n) {
    double c = std::cos(2.0 * std::numbers::pi * n / denom);
    w[static_cast<std::size_t>(n)] = kind == WindowKind::kHamming ? 0.54 - 0.46 * c : 0.5 - 0.5 * c;
  }
  return w;
}

// Splits into overlapping frames; each row is pre-emphasized
// (y[t] = x[t] - a*x[t-1], first sample against itself) and then windowed.
inline Matrix frame_signal(const Waveform& w, const FrameSpec& spec) {
  check_waveform(w);
  validate(spec, w.sample_rate_hz);
  const int len = spec.frame_samples(w.sample_rate_hz);
  const int shift = spec.shift_samples(w.sample_rate_hz);
  const std::size_t n = frame_count(w.size(), len, shift);
  if (n == 0) {
    throw Error(ErrorCode::kTooShort, "signal of " + std::to_string(w.size()) +
                                          " samples is shorter than one frame of " +
                                          std::to_string(len));
  }
  const std::vector<double> window = make_window(spec.window, len);
  const double a = spec.preemphasis;

  Matrix frames(static_cast<Eigen::Index>(n), len);
  for (std::size_t f = 0; f < n; ++f) {
    const double* x = w.samples.data() + f * static_cast<std::size_t>(shift);
    auto row = frames.row(static_cast<Eigen::Index>(f));
    for (int t = len - 1; t >= 0; --t) {
      double prev = t > 0 ? x[t - 1] : x[0];
      row(t) = (x[t] - a * prev) * window[static_cast<std::size_t>(t)];
    }
  }
  return frames;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// n_filters x (fft_size/2 + 1) triangular weights; triangles are linear in
// mel between adjacent mel-spaced centers.
inline Matrix mel_filterbank(const MelSpec& spec, int sample_rate_hz, int fft_size) {
  validate(spec, sample_rate_hz);
  const int n_bins = fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(spec.low_freq_hz);
  const double mel_hi = hz_to_mel(spec.upper(sample_rate_hz));
  const double step = (mel_hi - mel_lo) / (spec.n_filters + 1);

  Matrix bank = Matrix::Zero(spec.n_filters, n_bins);
  for (int m = 0; m < spec.n_filters; ++m) {
    const double left = mel_lo + m * step;
    const double center = left + step;
    const double right = center + step;
    for (int k = 0; k < n_bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * sample_rate_hz / fft_size);
      if (mel > left && mel < right) {
        bank(m, k) = mel <= center ? (mel - left) / step : (right - mel) / step;
      }
    }
  }
  return bank;
}

inline double mel_center_hz(const MelSpec& spec, int sample_rate_hz, int filter) {
  const double mel_lo = hz_to_mel(spec.low_freq_hz);
  const double mel_hi = hz_to_mel(spec.upper(sample_rate_hz));
  const double step = (mel_hi - mel_lo) / (spec.n_filters + 1);
  return mel_to_hz(mel_lo + (filter + 1) * step);
}

// |FFT|^2 of every frame, zero-padded to fft_size.
inline Matrix power_spectrum(const Matrix& frames, int fft_size) {
  const int n_bins = fft_size / 2 + 1;
  Matrix power(frames.rows(), n_bins);
  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(fft_size));
  std::vector<std::complex<double>> spec;
  for (Eigen::Index f = 0; f < frames.rows(); ++f) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (Eigen::Index t = 0; t < frames.cols(); ++t) buf[static_cast<std::size_t>(t)] = frames(f, t);
    fft.fwd(spec, buf);
    for (int k = 0; k < n_bins; ++k) {
      power(f, k) = std::norm(spec[static_cast<std::size_t>(k)]);
    }
  }
  return power;
}

inline FeatureMatrix fbank(const Waveform& w, const FrameSpec& fspec = {}, const MelSpec& mspec = {}) {
  Matrix frames = frame_signal(w, fspec);
  Matrix bank = mel_filterbank(mspec, w.sample_rate_hz, fspec.fft_size);
  Matrix energies = power_spectrum(frames, fspec.fft_size) * bank.transpose();
  energies = energies.unaryExpr([](double e) { return std::log(std::max(e, kLogFloor)); });
  return {std::move(energies), FeatureKind::kFbank, fspec.frame_shift_ms};
}

// Orthonormal DCT-II basis, n_out x n_in.
inline Matrix dct2_basis(int n_in, int n_out) {
  Matrix basis(n_out, n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
    for (int m = 0; m < n_in; ++m) {
      basis(k, m) = scale * std::cos(std::numbers::pi * k * (m + 0.5) / n_in);
    }
  }
  return basis;
}

inline FeatureMatrix mfcc(const Waveform& w, const FrameSpec& fspec = {}, const MelSpec& mspec = {}) {
  FeatureMatrix fb = fbank(w, fspec, mspec);
  Matrix ceps = fb.values * dct2_basis(mspec.n_filters, mspec.n_cepstra).transpose();
  return {std::move(ceps), FeatureKind::kMfcc, fspec.frame_shift_ms};
}

inline FeatureMatrix extract_features(const Waveform& w, FeatureKind kind, const FrameSpec& fspec,
                                      const MelSpec& mspec) {
  switch (kind) {
    case FeatureKind::kFbank: return fbank(w, fspec, mspec);
    case FeatureKind::kMfcc: return mfcc(w, fspec, mspec);
    case FeatureKind::kSpliced: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "spliced is not an extractable feature kind");
}

inline int feature_dim(FeatureKind kind, const MelSpec& mspec) {
  return kind == FeatureKind::kMfcc ? mspec.n_cepstra : mspec.n_filters;
}

// Row n becomes rows n-left .. n+right side by side; edges repeat.
inline FeatureMatrix splice(const FeatureMatrix& f, int left, int right) {
  if (left < 0 || right < 0) throw Error(ErrorCode::kInvalidArgument, "negative context");
  const Eigen::Index n = f.frames();
  const Eigen::Index d = f.dim();
  if (n < 1) throw Error(ErrorCode::kEmptyInput, "cannot splice an empty feature matrix");
  if (left == 0 && right == 0) return f;
  const Eigen::Index width = left + right + 1;
  Matrix out(n, d * width);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < width; ++c) {
      Eigen::Index src = std::clamp<Eigen::Index>(r + c - left, 0, n - 1);
      out.block(r, c * d, 1, d) = f.values.row(src);
    }
  }
  return {std::move(out), FeatureKind::kSpliced, f.frame_shift_ms};
}

// Per-column standardization (population variance). Constant columns map to 0.
inline FeatureMatrix mvn(const FeatureMatrix& f) {
  const Eigen::Index n = f.frames();
  if (n < 2) {
    throw Error(ErrorCode::kTooFewFrames, "mvn needs at least 2 frames, got " + std::to_string(n));
  }
  FeatureMatrix out = f;
  for (Eigen::Index c = 0; c < f.dim(); ++c) {
    auto col = out.values.col(c);
    const double mean = col.mean();
    col.array() -= mean;
    const double var = col.squaredNorm() / static_cast<double>(n);
    const double scale = std::max(1.0, std::abs(mean));
    if (!(var > 1e-24 * scale * scale)) {
      col.setZero();
    } else {
      col /= std::sqrt(var);
    }
  }
  return out;
}

inline void check_finite(const FeatureMatrix& f) {
  if (!f.values.allFinite()) throw Error(ErrorCode::kNumeric, "non-finite feature value");
}

}  // namespace agekit
