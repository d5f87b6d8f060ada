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

// Small full-batch gradient-descent trainer for fixture acoustic models.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "agekit/am.hpp"
#include "agekit/error.hpp"
#include "agekit/features.hpp"

namespace agekit {

struct ToyArchitecture {
  std::vector<int> hidden_dims{16};
  Activation hidden_activation = Activation::kSigmoid;
  int left_context = 0;
  int right_context = 0;
  int n_classes = 0;  // 0: one more than the largest label
};

struct ToyHyperParams {
  double learning_rate = 0.5;
  int epochs = 200;
  std::uint64_t seed = 0;
};

// Same layout as AcousticModel::layers.
struct Gradient {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
};

// Uniform +-1/sqrt(fan_in) initialization.
inline AcousticModel init_model(const ToyArchitecture& arch, int input_dim, int n_classes,
                                std::uint64_t seed) {
  if (input_dim <= 0 || n_classes <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "input_dim and n_classes must be positive");
  }
  if (arch.hidden_activation == Activation::kSoftmax) {
    throw Error(ErrorCode::kActivation, "softmax is not a hidden activation");
  }
  AcousticModel m;
  m.input_dim = input_dim;
  m.left_context = arch.left_context;
  m.right_context = arch.right_context;

  std::mt19937_64 rng(seed);
  std::vector<int> dims{m.spliced_dim()};
  for (int h : arch.hidden_dims) {
    if (h <= 0) throw Error(ErrorCode::kInvalidArgument, "hidden dims must be positive");
    dims.push_back(h);
  }
  dims.push_back(n_classes);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::uniform_real_distribution<double> uni(-bound, bound);
    LayerSpec layer;
    layer.weight.resize(dims[l + 1], dims[l]);
    layer.bias.resize(dims[l + 1]);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = uni(rng);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = uni(rng);
    layer.activation = l + 2 == dims.size() ? Activation::kSoftmax : arch.hidden_activation;
    m.layers.push_back(std::move(layer));
  }
  validate(m);
  return m;
}

inline void check_labels(std::span<const int> labels, Eigen::Index n_frames, int n_classes) {
  if (labels.empty() || n_frames == 0) throw Error(ErrorCode::kEmptyInput, "no training frames");
  if (static_cast<Eigen::Index>(labels.size()) != n_frames) {
    throw Error(ErrorCode::kShape, std::to_string(labels.size()) + " labels for " +
                                       std::to_string(n_frames) + " frames");
  }
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || labels[n] >= n_classes) {
      throw Error(ErrorCode::kLabelRange, "label " + std::to_string(labels[n]) + " at frame " +
                                              std::to_string(n) + " outside [0, " +
                                              std::to_string(n_classes) + ")");
    }
  }
}

// Mean frame cross-entropy -log P(label | x) via a stable log-softmax.
inline double cross_entropy_loss(const AcousticModel& m, const Matrix& input,
                                 std::span<const int> labels) {
  check_labels(labels, input.rows(), m.n_classes());
  const Matrix z = forward_logits(m, input);
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    const double lse = mx + std::log((z.row(r).array() - mx).exp().sum());
    total += lse - z(r, labels[static_cast<std::size_t>(r)]);
  }
  return total / static_cast<double>(z.rows());
}

struct LossAndGradient {
  double loss = 0.0;
  Gradient gradient;
};

// Mean cross-entropy and its analytic gradient by backpropagation.
inline LossAndGradient loss_and_gradient(const AcousticModel& m, const Matrix& input,
                                         std::span<const int> labels) {
  check_labels(labels, input.rows(), m.n_classes());
  const std::size_t n_layers = m.layers.size();
  const auto n = static_cast<double>(input.rows());

  // acts[l] is the input to layer l.
  std::vector<Matrix> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(input);
  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    Matrix z = detail::affine(acts.back(), m.layers[l]);
    detail::apply_activation(z, m.layers[l].activation);
    acts.push_back(std::move(z));
  }
  Matrix logits = detail::affine(acts.back(), m.layers.back());

  LossAndGradient out;
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    total += lse - logits(r, labels[static_cast<std::size_t>(r)]);
  }
  out.loss = total / n;

  Matrix delta = std::move(logits);
  detail::softmax_rows(delta);
  for (Eigen::Index r = 0; r < delta.rows(); ++r) delta(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
  delta /= n;

  Gradient& g = out.gradient;
  g.weight.resize(n_layers);
  g.bias.resize(n_layers);
  for (std::size_t l = n_layers; l-- > 0;) {
    g.weight[l] = delta.transpose() * acts[l];
    g.bias[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix back = delta * m.layers[l].weight;
    const Matrix& a = acts[l];
    switch (m.layers[l - 1].activation) {
      case Activation::kSigmoid:
        back.array() *= a.array() * (1.0 - a.array());
        break;
      case Activation::kTanh:
        back.array() *= 1.0 - a.array().square();
        break;
      case Activation::kRelu:
        back.array() *= (a.array() > 0.0).cast<double>();
        break;
      case Activation::kSoftmax:
        throw Error(ErrorCode::kActivation, "softmax in a hidden layer");
    }
    delta = std::move(back);
  }
  return out;
}

inline void apply_gradient(AcousticModel& m, const Gradient& g, double learning_rate) {
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    m.layers[l].weight -= learning_rate * g.weight[l];
    m.layers[l].bias -= learning_rate * g.bias[l];
  }
}

// Full-batch gradient descent on mean cross-entropy from a seeded init.
// `loss_history`, when given, receives the loss before every epoch plus the
// loss of the last iterate (epochs + 1 values). The returned model is the
// last iterate unless an earlier one had strictly lower loss.
inline AcousticModel train_toy(const FeatureMatrix& features, std::span<const int> labels,
                               const ToyArchitecture& arch, const ToyHyperParams& hyper,
                               std::vector<double>* loss_history = nullptr) {
  if (features.frames() == 0 || labels.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no training data");
  }
  if (hyper.epochs < 0 || !(hyper.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0 and learning rate > 0");
  }
  int n_classes = arch.n_classes;
  if (n_classes <= 0) n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  check_labels(labels, features.frames(), n_classes);
  if (features.frames() < n_classes) {
    throw Error(ErrorCode::kTooFewFrames, "fewer frames than classes");
  }

  AcousticModel m = init_model(arch, static_cast<int>(features.dim()), n_classes, hyper.seed);
  const Matrix input = splice(features, m.left_context, m.right_context).values;

  if (loss_history) loss_history->clear();
  AcousticModel best = m;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    LossAndGradient lg = loss_and_gradient(m, input, labels);
    if (loss_history) loss_history->push_back(lg.loss);
    if (lg.loss < best_loss) {
      best_loss = lg.loss;
      best = m;
    }
    apply_gradient(m, lg.gradient, hyper.learning_rate);
  }
  const double final_loss = cross_entropy_loss(m, input, labels);
  if (loss_history) loss_history->push_back(final_loss);
  // An overshooting step never makes the result worse than the best iterate.
  if (!(final_loss <= best_loss)) m = std::move(best);
  validate(m);
  return m;
}

// Fraction of frames whose arg-max posterior differs from the label.
inline double frame_error_rate(const PosteriorMatrix& p, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != p.frames()) {
    throw Error(ErrorCode::kShape, "label count differs from frame count");
  }
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "no frames");
  std::size_t errors = 0;
  for (Eigen::Index r = 0; r < p.frames(); ++r) {
    Eigen::Index best = 0;
    p.values.row(r).maxCoeff(&best);
    if (best != labels[static_cast<std::size_t>(r)]) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(labels.size());
}

}  // namespace agekit
