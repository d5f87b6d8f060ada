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

#include "agekit/error.hpp"
#include "agekit/waveform.hpp"

namespace agekit {

// N frames x I classes; each row is a distribution over acoustic-model
// output classes (state posterior probabilities).
struct PosteriorMatrix {
  Matrix values;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index classes() const { return values.cols(); }

  // First `n` frames.
  PosteriorMatrix head(Eigen::Index n) const { return {values.topRows(n)}; }
};

// Entries must lie in [0, 1] (exact zeros appear when softmax underflows)
// and rows must sum to one within `tolerance`.
inline void validate(const PosteriorMatrix& p, double tolerance = 1e-6) {
  if (p.frames() == 0 || p.classes() == 0) {
    throw Error(ErrorCode::kEmptyInput, "posterior matrix is empty");
  }
  for (Eigen::Index r = 0; r < p.frames(); ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < p.classes(); ++c) {
      const double v = p.values(r, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kNumeric, "posterior entry outside [0,1] at frame " +
                                             std::to_string(r));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(ErrorCode::kNumeric, "posterior row " + std::to_string(r) +
                                           " does not sum to one");
    }
  }
}

}  // namespace agekit
