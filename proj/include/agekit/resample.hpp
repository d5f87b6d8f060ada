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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "agekit/error.hpp"
#include "agekit/waveform.hpp"

namespace agekit {

struct ResampleOptions {
  int zero_crossings = 16;     // half filter length, in low-rate sinc lobes
  double rolloff = 0.95;       // cutoff as a fraction of the lower Nyquist
  double kaiser_beta = 8.6;
};

namespace detail {

class SincKernel {
 public:
  SincKernel(double cutoff, double half_width, double beta)
      : cutoff_(cutoff), half_width_(half_width), beta_(beta),
        norm_(1.0 / std::cyl_bessel_i(0.0, beta)) {}

  // Impulse response at offset `t` input samples from the output instant.
  double operator()(double t) const {
    if (std::abs(t) >= half_width_) return 0.0;
    double x = t / half_width_;
    double window = std::cyl_bessel_i(0.0, beta_ * std::sqrt(1.0 - x * x)) * norm_;
    double arg = std::numbers::pi * cutoff_ * t;
    double sinc = arg == 0.0 ? 1.0 : std::sin(arg) / arg;
    return cutoff_ * sinc * window;
  }

  double half_width() const { return half_width_; }

 private:
  double cutoff_;
  double half_width_;
  double beta_;
  double norm_;
};

}  // namespace detail

// Band-limited rational resampling with a Kaiser-windowed sinc. Output sample
// j sits at input time j * source / target; the filter taps for each of the
// `up` fractional phases are tabulated once (polyphase) when the phase count
// is modest, otherwise evaluated directly.
inline Waveform resample(const Waveform& w, int target_hz, const ResampleOptions& opt = {}) {
  if (target_hz <= 0) throw Error(ErrorCode::kInvalidArgument, "target rate must be positive");
  check_waveform(w);
  if (target_hz == w.sample_rate_hz) return w;

  const std::int64_t g = std::gcd<std::int64_t>(w.sample_rate_hz, target_hz);
  const std::int64_t up = target_hz / g;
  const std::int64_t down = w.sample_rate_hz / g;
  const double ratio = static_cast<double>(target_hz) / w.sample_rate_hz;

  // Cutoff in cycles per input sample (times 2): min(1, ratio) of input Nyquist.
  const double cutoff = std::min(1.0, ratio) * opt.rolloff;
  const double half_width = opt.zero_crossings / std::min(1.0, ratio);
  detail::SincKernel kernel(cutoff, half_width, opt.kaiser_beta);

  const auto n_in = static_cast<std::int64_t>(w.size());
  const auto n_out = static_cast<std::int64_t>(
      std::llround(static_cast<double>(n_in) * target_hz / w.sample_rate_hz));
  const auto taps = static_cast<std::int64_t>(std::ceil(half_width));

  // Tap k of phase p weighs input sample (base + k - taps + 1), base = floor(t).
  const std::int64_t span = 2 * taps;
  const bool tabulate = up <= 4096;
  std::vector<double> table;
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up * span));
    for (std::int64_t p = 0; p < up; ++p) {
      double frac = static_cast<double>(p) / up;
      for (std::int64_t k = 0; k < span; ++k) {
        table[static_cast<std::size_t>(p * span + k)] = kernel(frac - (k - taps + 1));
      }
    }
  }

  Waveform out;
  out.sample_rate_hz = target_hz;
  out.samples.assign(static_cast<std::size_t>(std::max<std::int64_t>(n_out, 0)), 0.0);
  for (std::int64_t j = 0; j < n_out; ++j) {
    const std::int64_t num = j * down;
    const std::int64_t base = num / up;
    const std::int64_t phase = num % up;
    const double frac = static_cast<double>(phase) / up;
    double acc = 0.0;
    for (std::int64_t k = 0; k < span; ++k) {
      std::int64_t idx = base + k - taps + 1;
      if (idx < 0 || idx >= n_in) continue;
      double h = tabulate ? table[static_cast<std::size_t>(phase * span + k)]
                          : kernel(frac - (k - taps + 1));
      acc += h * w.samples[static_cast<std::size_t>(idx)];
    }
    out.samples[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

}  // namespace agekit
