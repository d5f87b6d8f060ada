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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "agekit/error.hpp"

namespace agekit {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Mono audio with nominal amplitude range [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

inline void check_waveform(const Waveform& w, std::string_view what = "waveform") {
  if (w.sample_rate_hz <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " has non-positive sample rate");
  }
  if (w.samples.empty()) {
    throw Error(ErrorCode::kEmptyInput, std::string(what) + " has no samples");
  }
}

// Mean squared amplitude.
inline double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

}  // namespace agekit
