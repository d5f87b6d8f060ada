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

// Feed-forward acoustic model: affine + nonlinearity stacks over spliced
// feature frames, ending in a softmax over output classes.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agekit/error.hpp"
#include "agekit/features.hpp"
#include "agekit/posterior.hpp"
#include "agekit/waveform.hpp"

namespace agekit {

enum class Activation { kSigmoid, kRelu, kTanh, kSoftmax };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSoftmax: return "softmax";
  }
  return "unknown";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "softmax") return Activation::kSoftmax;
  throw Error(ErrorCode::kActivation, "unknown activation '" + std::string(s) + "'");
}

struct LayerSpec {
  Matrix weight;  // out_dim x in_dim
  Vector bias;    // out_dim
  Activation activation = Activation::kSigmoid;

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }
};

struct AcousticModel {
  std::vector<LayerSpec> layers;
  int left_context = 0;
  int right_context = 0;
  int input_dim = 0;  // before splicing

  int context_width() const { return left_context + right_context + 1; }
  int spliced_dim() const { return input_dim * context_width(); }
  int n_classes() const {
    return layers.empty() ? 0 : static_cast<int>(layers.back().out_dim());
  }
};

inline void validate(const AcousticModel& m) {
  if (m.layers.empty()) throw Error(ErrorCode::kDimensionChain, "model has no layers");
  if (m.input_dim <= 0) throw Error(ErrorCode::kDimensionChain, "input_dim must be positive");
  if (m.left_context < 0 || m.right_context < 0) {
    throw Error(ErrorCode::kDimensionChain, "context must be non-negative");
  }
  Eigen::Index expect = m.spliced_dim();
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const LayerSpec& layer = m.layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.out_dim() <= 0) throw Error(ErrorCode::kDimensionChain, where + " has no outputs");
    if (layer.in_dim() != expect) {
      throw Error(ErrorCode::kDimensionChain,
                  where + " expects in_dim " + std::to_string(layer.in_dim()) + " but receives " +
                      std::to_string(expect));
    }
    if (layer.bias.size() != layer.out_dim()) {
      throw Error(ErrorCode::kDimensionChain, where + " bias length differs from out_dim");
    }
    const bool last = l + 1 == m.layers.size();
    if (layer.activation == Activation::kSoftmax && !last) {
      throw Error(ErrorCode::kActivation, where + ": softmax only allowed on the final layer");
    }
    if (last && layer.activation != Activation::kSoftmax) {
      throw Error(ErrorCode::kActivation, "final layer activation must be softmax");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw Error(ErrorCode::kNumeric, where + " has non-finite parameters");
    }
    expect = layer.out_dim();
  }
}

namespace detail {

inline void softmax_rows(Matrix& z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

inline void apply_activation(Matrix& z, Activation a) {
  switch (a) {
    case Activation::kSigmoid:
      z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      break;
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::kSoftmax:
      softmax_rows(z);
      break;
  }
}

inline Matrix affine(const Matrix& x, const LayerSpec& layer) {
  Matrix z = x * layer.weight.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

}  // namespace detail

// Network input for `f`: raw features are spliced with the model's context,
// already-spliced features pass through.
inline Matrix model_input(const AcousticModel& m, const FeatureMatrix& f) {
  if (f.frames() < 1) throw Error(ErrorCode::kEmptyInput, "no frames to score");
  if (f.dim() == m.input_dim) {
    return splice(f, m.left_context, m.right_context).values;
  }
  if (f.dim() == m.spliced_dim()) return f.values;
  throw Error(ErrorCode::kShape, "feature dim " + std::to_string(f.dim()) +
                                     " matches neither model input_dim " +
                                     std::to_string(m.input_dim) + " nor spliced dim " +
                                     std::to_string(m.spliced_dim()));
}

// Pre-softmax activations of the final layer.
inline Matrix forward_logits(const AcousticModel& m, const Matrix& input) {
  if (input.cols() != m.spliced_dim()) {
    throw Error(ErrorCode::kShape, "network input has wrong width");
  }
  Matrix h = input;
  for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
    h = detail::affine(h, m.layers[l]);
    detail::apply_activation(h, m.layers[l].activation);
  }
  return detail::affine(h, m.layers.back());
}

inline PosteriorMatrix forward(const AcousticModel& m, const FeatureMatrix& f) {
  Matrix z = forward_logits(m, model_input(m, f));
  if (!z.allFinite()) throw Error(ErrorCode::kNumeric, "non-finite logits");
  detail::softmax_rows(z);
  if (!z.allFinite()) throw Error(ErrorCode::kNumeric, "non-finite posteriors");
  return {std::move(z)};
}

}  // namespace agekit
