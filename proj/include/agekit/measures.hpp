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
#include <cstddef>
#include <string>
#include <string_view>

#include "agekit/error.hpp"
#include "agekit/posterior.hpp"

namespace agekit {

enum class MeasureKind { kAge, kEntropy, kStoi };

inline constexpr MeasureKind kAllMeasures[] = {MeasureKind::kAge, MeasureKind::kEntropy,
                                               MeasureKind::kStoi};

inline std::string_view to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::kAge: return "age";
    case MeasureKind::kEntropy: return "entropy";
    case MeasureKind::kStoi: return "stoi";
  }
  return "unknown";
}

inline MeasureKind measure_from_string(std::string_view s) {
  if (s == "age") return MeasureKind::kAge;
  if (s == "entropy") return MeasureKind::kEntropy;
  if (s == "stoi") return MeasureKind::kStoi;
  throw Error(ErrorCode::kInvalidArgument, "unknown measure '" + std::string(s) + "'");
}

struct MeasureScore {
  MeasureKind measure = MeasureKind::kAge;
  double value = 0.0;
  std::size_t n_frames_used = 0;
};

// Floor applied to degraded posteriors before the log.
inline constexpr double kPosteriorFloor = 1e-10;

// Frame-averaged cross-entropy of the degraded posteriors against the clean
// ones, natural log:
//   m = -(1/N) sum_n sum_i Pc[n,i] * ln(max(Pd[n,i], eps)).
inline MeasureScore age(const PosteriorMatrix& clean, const PosteriorMatrix& degraded) {
  if (clean.frames() != degraded.frames() || clean.classes() != degraded.classes()) {
    throw Error(ErrorCode::kAlignment,
                "posterior shapes differ: " + std::to_string(clean.frames()) + "x" +
                    std::to_string(clean.classes()) + " vs " + std::to_string(degraded.frames()) +
                    "x" + std::to_string(degraded.classes()));
  }
  if (clean.frames() == 0 || clean.classes() == 0) {
    throw Error(ErrorCode::kEmptyInput, "no frames to score");
  }
  const auto& pc = clean.values;
  const auto& pd = degraded.values;
  double total = 0.0;
  for (Eigen::Index n = 0; n < pc.rows(); ++n) {
    double row = 0.0;
    for (Eigen::Index i = 0; i < pc.cols(); ++i) {
      row += pc(n, i) * std::log(std::max(pd(n, i), kPosteriorFloor));
    }
    total += row;
  }
  const double value = -total / static_cast<double>(pc.rows());
  return {MeasureKind::kAge, value, static_cast<std::size_t>(pc.rows())};
}

// Mean entropy of the posteriors; the acoustic-confidence baseline.
inline MeasureScore entropy_confidence(const PosteriorMatrix& degraded) {
  MeasureScore s = age(degraded, degraded);
  s.measure = MeasureKind::kEntropy;
  return s;
}

}  // namespace agekit
