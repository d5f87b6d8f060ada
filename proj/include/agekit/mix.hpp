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

#include <cmath>
#include <cstddef>
#include <vector>

#include "agekit/error.hpp"
#include "agekit/waveform.hpp"

namespace agekit {

// The two additive parts of a mixture, kept apart so the achieved SNR can be
// checked on the components themselves.
struct MixComponents {
  Waveform clean;
  Waveform scaled_noise;
  double gain = 0.0;
};

// Noise starting at `offset` and wrapped cyclically to `length` samples.
inline std::vector<double> noise_segment(const std::vector<double>& noise, std::size_t offset,
                                         std::size_t length) {
  std::vector<double> seg(length);
  const std::size_t n = noise.size();
  std::size_t idx = offset % n;
  for (std::size_t t = 0; t < length; ++t) {
    seg[t] = noise[idx];
    if (++idx == n) idx = 0;
  }
  return seg;
}

inline MixComponents mix_components(const Waveform& clean, const Waveform& noise, double snr_db,
                                    std::size_t noise_offset = 0) {
  check_waveform(clean, "clean");
  check_waveform(noise, "noise");
  if (clean.sample_rate_hz != noise.sample_rate_hz) {
    throw Error(ErrorCode::kRateMismatch,
                "clean at " + std::to_string(clean.sample_rate_hz) + " Hz, noise at " +
                    std::to_string(noise.sample_rate_hz) + " Hz");
  }
  if (!std::isfinite(snr_db)) throw Error(ErrorCode::kInvalidArgument, "snr_db is not finite");

  const double p_clean = mean_power(clean.samples);
  if (!(p_clean > 0.0)) throw Error(ErrorCode::kDegenerateSignal, "clean signal has zero power");
  std::vector<double> seg = noise_segment(noise.samples, noise_offset, clean.size());
  const double p_noise = mean_power(seg);
  if (!(p_noise > 0.0)) {
    throw Error(ErrorCode::kDegenerateSignal, "noise segment has zero power");
  }

  const double gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  for (double& v : seg) v *= gain;
  return {clean, Waveform{std::move(seg), clean.sample_rate_hz}, gain};
}

inline Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db,
                           std::size_t noise_offset = 0) {
  MixComponents parts = mix_components(clean, noise, snr_db, noise_offset);
  Waveform out = std::move(parts.clean);
  for (std::size_t t = 0; t < out.size(); ++t) out.samples[t] += parts.scaled_noise.samples[t];
  return out;
}

}  // namespace agekit
