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

#include <cmath>
#include <random>
#include <vector>

#include "agekit/am.hpp"
#include "agekit/model_io.hpp"
#include "agekit/train.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"
#include "test_util.hpp"

namespace agekit {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kConfig;
}

AcousticModel one_layer(Matrix w, Vector b) {
  AcousticModel m;
  m.input_dim = static_cast<int>(w.cols());
  m.layers.push_back({std::move(w), std::move(b), Activation::kSoftmax});
  return m;
}

FeatureMatrix features_of(Matrix v) { return {std::move(v), FeatureKind::kFbank, 10.0}; }

TEST(Forward, ZeroWeightsGiveUniformPosteriors) {
  AcousticModel m = one_layer(Matrix::Zero(4, 3), Vector::Zero(4));
  PosteriorMatrix p = forward(m, features_of(Matrix::Ones(5, 3)));
  ASSERT_EQ(p.frames(), 5);
  for (Eigen::Index i = 0; i < p.values.size(); ++i) EXPECT_DOUBLE_EQ(p.values.data()[i], 0.25);
}

TEST(Forward, BiasOnlySoftmax) {
  Vector b(2);
  b << 1.0, 0.0;
  AcousticModel m = one_layer(Matrix::Zero(2, 1), b);
  PosteriorMatrix p = forward(m, features_of(Matrix::Zero(1, 1)));
  const double e = std::exp(1.0);
  EXPECT_NEAR(p.values(0, 0), e / (e + 1.0), 1e-15);
  EXPECT_NEAR(p.values(0, 1), 1.0 / (e + 1.0), 1e-15);
  EXPECT_NEAR(p.values(0, 0), 0.7311, 1e-4);
}

TEST(Forward, MatchesLoopOracleForEveryActivation) {
  std::mt19937_64 rng(11);
  for (Activation act : {Activation::kSigmoid, Activation::kRelu, Activation::kTanh}) {
    AcousticModel m = oracle::random_model(rng, {12, 9, 7, 5}, act, 4, 1, 1);
    ASSERT_NO_THROW(validate(m));
    FeatureMatrix f = features_of(testing::random_matrix(rng, 30, 4));
    PosteriorMatrix p = forward(m, f);
    oracle::Grid want = oracle::forward(m, oracle::to_grid(splice(f, 1, 1).values));
    for (Eigen::Index r = 0; r < p.frames(); ++r) {
      EXPECT_NEAR(p.values.row(r).sum(), 1.0, 1e-12);
      for (Eigen::Index c = 0; c < p.classes(); ++c) {
        EXPECT_NEAR(p.values(r, c), want[r][c], 1e-12);
      }
    }
  }
}

TEST(Forward, InvariantToFinalLogitShift) {
  std::mt19937_64 rng(12);
  AcousticModel m = oracle::random_model(rng, {6, 8, 4}, Activation::kTanh, 6);
  FeatureMatrix f = features_of(testing::random_matrix(rng, 20, 6));
  PosteriorMatrix before = forward(m, f);
  m.layers.back().bias.array() += 37.5;
  PosteriorMatrix after = forward(m, f);
  EXPECT_LE((before.values - after.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, AcceptsPreSplicedInput) {
  std::mt19937_64 rng(13);
  AcousticModel m = oracle::random_model(rng, {15, 4}, Activation::kSigmoid, 3, 2, 2);
  FeatureMatrix f = features_of(testing::random_matrix(rng, 10, 3));
  FeatureMatrix spliced = splice(f, 2, 2);
  EXPECT_EQ(forward(m, f).values, forward(m, spliced).values);
}

TEST(Forward, FeatureWidthMismatchIsShapeError) {
  AcousticModel m = one_layer(Matrix::Zero(3, 4), Vector::Zero(3));
  EXPECT_EQ(code_of([&] { forward(m, features_of(Matrix::Zero(2, 5))); }), ErrorCode::kShape);
}

TEST(Validate, RejectsMalformedModels) {
  std::mt19937_64 rng(14);
  AcousticModel good = oracle::random_model(rng, {5, 6, 3}, Activation::kRelu, 5);

  AcousticModel chain = good;
  chain.layers[1].weight = Matrix::Zero(3, 7);
  EXPECT_EQ(code_of([&] { validate(chain); }), ErrorCode::kDimensionChain);

  AcousticModel tail = good;
  tail.layers[1].activation = Activation::kSigmoid;
  EXPECT_EQ(code_of([&] { validate(tail); }), ErrorCode::kActivation);

  AcousticModel early = good;
  early.layers[0].activation = Activation::kSoftmax;
  EXPECT_EQ(code_of([&] { validate(early); }), ErrorCode::kActivation);

  AcousticModel empty = good;
  empty.layers.clear();
  EXPECT_EQ(code_of([&] { validate(empty); }), ErrorCode::kDimensionChain);

  AcousticModel nan = good;
  nan.layers[0].bias(0) = std::nan("");
  EXPECT_EQ(code_of([&] { validate(nan); }), ErrorCode::kNumeric);
}

TEST(ModelIo, RoundTripIsExact) {
  std::mt19937_64 rng(15);
  auto dir = testing::scratch_dir("model_io");
  for (const std::vector<int>& dims : {std::vector<int>{10, 3}, std::vector<int>{10, 8, 6, 4}}) {
    AcousticModel m = oracle::random_model(rng, dims, Activation::kTanh, 2, 3, 1);
    save_model(m, dir / "m.json");
    AcousticModel back = load_model(dir / "m.json");
    ASSERT_EQ(back.layers.size(), m.layers.size());
    EXPECT_EQ(back.input_dim, 2);
    EXPECT_EQ(back.left_context, 3);
    EXPECT_EQ(back.right_context, 1);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      EXPECT_EQ(back.layers[l].weight, m.layers[l].weight);
      EXPECT_EQ(back.layers[l].bias, m.layers[l].bias);
      EXPECT_EQ(back.layers[l].activation, m.layers[l].activation);
    }
    FeatureMatrix f = features_of(testing::random_matrix(rng, 8, 2));
    EXPECT_LE((forward(m, f).values - forward(back, f).values).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ModelIo, MalformedJson) {
  nlohmann::json j = nlohmann::json::parse(
      R"({"input_dim":2,"left_context":0,"right_context":0,"layers":[
          {"activation":"sigmoid","out_dim":2,"in_dim":2,"weight":[1,0,0,1],"bias":[0,0]},
          {"activation":"softmax","out_dim":2,"in_dim":3,"weight":[1,0,0,1,0,0],"bias":[0,0]}]})");
  EXPECT_EQ(code_of([&] { model_from_json(j); }), ErrorCode::kDimensionChain);
  j["layers"][1] = {{"activation", "softmax"}, {"out_dim", 2}, {"in_dim", 2},
                    {"weight", {1, 0, 0}}, {"bias", {0, 0}}};
  EXPECT_EQ(code_of([&] { model_from_json(j); }), ErrorCode::kDimensionChain);
  j["layers"][1]["weight"] = {1, 0, 0, 1};
  j["layers"][1]["activation"] = "relu";
  EXPECT_EQ(code_of([&] { model_from_json(j); }), ErrorCode::kActivation);
  j["layers"][1]["activation"] = "softmax";
  EXPECT_NO_THROW(model_from_json(j));
  j.erase("input_dim");
  EXPECT_EQ(code_of([&] { model_from_json(j); }), ErrorCode::kParse);
}

// Three well-separated Gaussian clusters in 2-D.
struct Clusters {
  FeatureMatrix features;
  std::vector<int> labels;
};

Clusters make_clusters(std::uint64_t seed, int per_class) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.5);
  const double centers[3][2] = {{-3.0, 0.0}, {3.0, 0.0}, {0.0, 4.0}};
  Clusters c;
  c.features = features_of(Matrix(3 * per_class, 2));
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < per_class; ++i) {
      const int r = k * per_class + i;
      c.features.values(r, 0) = centers[k][0] + g(rng);
      c.features.values(r, 1) = centers[k][1] + g(rng);
      c.labels.push_back(k);
    }
  }
  return c;
}

TEST(TrainToy, SeparatesGaussianClusters) {
  Clusters c = make_clusters(21, 200);
  ToyArchitecture arch;
  arch.hidden_dims = {16};
  ToyHyperParams hyper{0.5, 300, 3};
  AcousticModel m = train_toy(c.features, c.labels, arch, hyper);
  EXPECT_EQ(m.n_classes(), 3);
  const double accuracy = 1.0 - frame_error_rate(forward(m, c.features), c.labels);
  EXPECT_GE(accuracy, 0.95);
}

TEST(TrainToy, ZeroEpochsReturnsInitialization) {
  Clusters c = make_clusters(22, 10);
  ToyArchitecture arch;
  AcousticModel m = train_toy(c.features, c.labels, arch, {0.5, 0, 9});
  AcousticModel init = init_model(arch, 2, 3, 9);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    EXPECT_EQ(m.layers[l].weight, init.layers[l].weight);
    EXPECT_EQ(m.layers[l].bias, init.layers[l].bias);
  }
  const double bound = 1.0 / std::sqrt(2.0);
  EXPECT_LE(init.layers[0].weight.cwiseAbs().maxCoeff(), bound);
}

TEST(TrainToy, SameSeedSameBits) {
  Clusters c = make_clusters(23, 30);
  ToyArchitecture arch;
  arch.hidden_dims = {8, 8};
  arch.left_context = 1;
  arch.right_context = 1;
  AcousticModel a = train_toy(c.features, c.labels, arch, {0.3, 40, 5});
  AcousticModel b = train_toy(c.features, c.labels, arch, {0.3, 40, 5});
  EXPECT_EQ(model_to_json(a).dump(), model_to_json(b).dump());
  AcousticModel other = train_toy(c.features, c.labels, arch, {0.3, 40, 6});
  EXPECT_NE(model_to_json(a).dump(), model_to_json(other).dump());
}

TEST(TrainToy, AnalyticGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(24);
  Clusters c = make_clusters(24, 5);
  for (Activation act : {Activation::kSigmoid, Activation::kTanh}) {
    ToyArchitecture arch;
    arch.hidden_dims = {6, 5};
    arch.hidden_activation = act;
    arch.left_context = 1;
    arch.right_context = 1;
    AcousticModel m = init_model(arch, 2, 3, 1);
    const Matrix input = splice(c.features, 1, 1).values;
    EXPECT_LT(oracle::gradient_check(m, input, c.labels, rng, 10, 1e-5), 1e-6);
  }
}

TEST(TrainToy, LossNonIncreasingAtSmallStep) {
  Clusters c = make_clusters(25, 20);
  std::vector<double> history;
  train_toy(c.features, c.labels, ToyArchitecture{}, {1e-3, 50, 2}, &history);
  ASSERT_EQ(history.size(), 51u);
  for (std::size_t i = 1; i < history.size(); ++i) EXPECT_LE(history[i], history[i - 1]);
}

TEST(TrainToy, LabelErrors) {
  Clusters c = make_clusters(26, 4);
  ToyArchitecture arch;
  arch.n_classes = 2;
  EXPECT_EQ(code_of([&] { train_toy(c.features, c.labels, arch, {}); }), ErrorCode::kLabelRange);
  std::vector<int> short_labels(c.labels.begin(), c.labels.end() - 1);
  EXPECT_EQ(code_of([&] { train_toy(c.features, short_labels, ToyArchitecture{}, {}); }),
            ErrorCode::kShape);
  std::vector<int> negative = c.labels;
  negative[0] = -1;
  EXPECT_EQ(code_of([&] { train_toy(c.features, negative, ToyArchitecture{}, {}); }),
            ErrorCode::kLabelRange);
}

}  // namespace
}  // namespace agekit
