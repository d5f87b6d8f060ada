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

// Short-time objective intelligibility with the standard published
// parameters: 10 kHz analysis, 256-sample Hann frames at 50% overlap,
// 512-point FFT, 15 one-third-octave bands from 150 Hz, 30-frame (384 ms)
// segments, -15 dB SDR clipping, 40 dB silent-frame range.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "agekit/error.hpp"
#include "agekit/measures.hpp"
#include "agekit/resample.hpp"
#include "agekit/waveform.hpp"

namespace agekit {

struct StoiParams {
  int sample_rate_hz = 10000;
  int frame_length = 256;
  int fft_size = 512;
  int n_bands = 15;
  double min_center_hz = 150.0;
  int segment_frames = 30;
  double beta_db = -15.0;
  double dynamic_range_db = 40.0;
  double length_tolerance = 0.02;
};

namespace stoi_detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Symmetric Hann without the zero end points (MATLAB hanning(n)).
inline std::vector<double> hanning(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (i + 1) / (n + 1)));
  }
  return w;
}

// Frame start offsets 0, hop, 2*hop, ... strictly below len - frame.
inline std::vector<std::size_t> frame_starts(std::size_t len, int frame, int hop) {
  std::vector<std::size_t> starts;
  const auto f = static_cast<std::size_t>(frame);
  for (std::size_t s = 0; s + f < len; s += static_cast<std::size_t>(hop)) starts.push_back(s);
  return starts;
}

// Band-by-bin 0/1 matrix; each band covers [nearest bin to lower edge,
// nearest bin to upper edge).
inline Matrix third_octave_bands(const StoiParams& p) {
  const int n_bins = p.fft_size / 2 + 1;
  Matrix bands = Matrix::Zero(p.n_bands, n_bins);
  auto nearest_bin = [&](double hz) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * p.sample_rate_hz / p.fft_size;
      const double d = (f - hz) * (f - hz);
      if (d < best_d) {
        best_d = d;
        best = b;
      }
    }
    return best;
  };
  for (int k = 0; k < p.n_bands; ++k) {
    const double lo = p.min_center_hz * std::pow(2.0, (2.0 * k - 1.0) / 6.0);
    const double hi = p.min_center_hz * std::pow(2.0, (2.0 * k + 1.0) / 6.0);
    for (int b = nearest_bin(lo); b < nearest_bin(hi); ++b) bands(k, b) = 1.0;
  }
  return bands;
}

struct SilenceTrimmed {
  std::vector<double> clean;
  std::vector<double> degraded;
};

// Drops frames whose windowed clean energy lies more than `range_db` below
// the loudest frame, then overlap-adds the surviving windowed frames.
inline SilenceTrimmed remove_silent_frames(const std::vector<double>& x,
                                           const std::vector<double>& y, const StoiParams& p) {
  const int n = p.frame_length;
  const int hop = n / 2;
  const std::vector<double> w = hanning(n);
  const std::vector<std::size_t> starts = frame_starts(x.size(), n, hop);
  if (starts.empty()) throw Error(ErrorCode::kTooShort, "signal shorter than one STOI frame");

  std::vector<double> energy_db(starts.size());
  for (std::size_t j = 0; j < starts.size(); ++j) {
    double acc = 0.0;
    for (int t = 0; t < n; ++t) {
      const double v = x[starts[j] + static_cast<std::size_t>(t)] * w[static_cast<std::size_t>(t)];
      acc += v * v;
    }
    energy_db[j] = 20.0 * std::log10(std::sqrt(acc) / std::sqrt(static_cast<double>(n)) + kEps);
  }
  const double max_db = *std::max_element(energy_db.begin(), energy_db.end());

  SilenceTrimmed out;
  out.clean.assign(x.size(), 0.0);
  out.degraded.assign(x.size(), 0.0);
  std::size_t kept = 0;
  std::size_t end = 0;
  for (std::size_t j = 0; j < starts.size(); ++j) {
    if (!(energy_db[j] - max_db + p.dynamic_range_db > 0.0)) continue;
    const std::size_t dst = starts[kept++];
    for (int t = 0; t < n; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      out.clean[dst + ti] += x[starts[j] + ti] * w[ti];
      out.degraded[dst + ti] += y[starts[j] + ti] * w[ti];
    }
    end = dst + static_cast<std::size_t>(n);
  }
  if (kept == 0) throw Error(ErrorCode::kDegenerateSignal, "all STOI frames are silent");
  out.clean.resize(end);
  out.degraded.resize(end);
  return out;
}

// One-third-octave band envelopes, n_bands x n_frames.
inline Matrix band_envelopes(const std::vector<double>& x, const Matrix& bands,
                             const StoiParams& p) {
  const int n = p.frame_length;
  const std::vector<double> w = hanning(n);
  const std::vector<std::size_t> starts = frame_starts(x.size(), n, n / 2);
  const int n_bins = p.fft_size / 2 + 1;

  Matrix env(bands.rows(), static_cast<Eigen::Index>(starts.size()));
  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(p.fft_size));
  std::vector<std::complex<double>> spec;
  Vector power(n_bins);
  for (std::size_t j = 0; j < starts.size(); ++j) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int t = 0; t < n; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      buf[ti] = x[starts[j] + ti] * w[ti];
    }
    fft.fwd(spec, buf);
    for (int b = 0; b < n_bins; ++b) power(b) = std::norm(spec[static_cast<std::size_t>(b)]);
    env.col(static_cast<Eigen::Index>(j)) = (bands * power).cwiseSqrt();
  }
  return env;
}

}  // namespace stoi_detail

inline MeasureScore stoi(const Waveform& clean, const Waveform& degraded,
                         const StoiParams& p = {}) {
  using namespace stoi_detail;
  check_waveform(clean, "clean");
  check_waveform(degraded, "degraded");
  if (clean.sample_rate_hz != degraded.sample_rate_hz) {
    throw Error(ErrorCode::kRateMismatch, "clean and degraded sample rates differ");
  }
  const std::size_t lc = clean.size();
  const std::size_t ld = degraded.size();
  const double rel = static_cast<double>(std::max(lc, ld) - std::min(lc, ld)) /
                     static_cast<double>(std::max(lc, ld));
  if (rel > p.length_tolerance) {
    throw Error(ErrorCode::kAlignment, "lengths " + std::to_string(lc) + " and " +
                                           std::to_string(ld) + " differ by more than tolerance");
  }
  if (!(mean_power(clean.samples) > 0.0)) {
    throw Error(ErrorCode::kDegenerateSignal, "clean signal is silent");
  }
  if (!(mean_power(degraded.samples) > 0.0)) {
    throw Error(ErrorCode::kDegenerateSignal, "degraded signal is silent");
  }

  Waveform x = clean;
  Waveform y = degraded;
  const std::size_t len = std::min(lc, ld);
  x.samples.resize(len);
  y.samples.resize(len);
  x = resample(x, p.sample_rate_hz);
  y = resample(y, p.sample_rate_hz);

  SilenceTrimmed trimmed = remove_silent_frames(x.samples, y.samples, p);
  const Matrix bands = third_octave_bands(p);
  const Matrix cx = band_envelopes(trimmed.clean, bands, p);
  const Matrix cy = band_envelopes(trimmed.degraded, bands, p);

  const Eigen::Index n_frames = cx.cols();
  const Eigen::Index seg = p.segment_frames;
  if (n_frames < seg) {
    throw Error(ErrorCode::kTooShort, "only " + std::to_string(n_frames) +
                                          " non-silent frames; STOI needs " +
                                          std::to_string(seg));
  }

  const double clip = std::pow(10.0, -p.beta_db / 20.0);
  double total = 0.0;
  std::size_t count = 0;
  Vector xs(seg);
  Vector ys(seg);
  for (Eigen::Index start = 0; start + seg <= n_frames; ++start) {
    for (Eigen::Index b = 0; b < cx.rows(); ++b) {
      xs = cx.row(b).segment(start, seg).transpose();
      ys = cy.row(b).segment(start, seg).transpose();
      const double alpha = xs.norm() / (ys.norm() + kEps);
      ys = (alpha * ys).cwiseMin(xs * (1.0 + clip));
      xs.array() -= xs.mean();
      ys.array() -= ys.mean();
      total += xs.dot(ys) / ((xs.norm() + kEps) * (ys.norm() + kEps));
      ++count;
    }
  }
  return {MeasureKind::kStoi, total / static_cast<double>(count),
          static_cast<std::size_t>(n_frames)};
}

}  // namespace agekit
