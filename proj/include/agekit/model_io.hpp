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

// JSON model format:
//   {"input_dim": int, "left_context": int, "right_context": int,
//    "layers": [{"activation": str, "out_dim": int, "in_dim": int,
//                "weight": [row-major floats], "bias": [floats]}]}

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "agekit/am.hpp"
#include "agekit/error.hpp"
#include "agekit/wav.hpp"

namespace agekit {

inline nlohmann::ordered_json model_to_json(const AcousticModel& m) {
  validate(m);
  nlohmann::ordered_json j;
  j["input_dim"] = m.input_dim;
  j["left_context"] = m.left_context;
  j["right_context"] = m.right_context;
  j["layers"] = nlohmann::ordered_json::array();
  for (const LayerSpec& layer : m.layers) {
    nlohmann::ordered_json jl;
    jl["activation"] = std::string(to_string(layer.activation));
    jl["out_dim"] = layer.out_dim();
    jl["in_dim"] = layer.in_dim();
    jl["weight"] = std::vector<double>(layer.weight.data(), layer.weight.data() + layer.weight.size());
    jl["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    j["layers"].push_back(std::move(jl));
  }
  return j;
}

inline AcousticModel model_from_json(const nlohmann::json& j) {
  AcousticModel m;
  try {
    m.input_dim = j.at("input_dim").get<int>();
    m.left_context = j.at("left_context").get<int>();
    m.right_context = j.at("right_context").get<int>();
    for (const auto& jl : j.at("layers")) {
      const auto out_dim = jl.at("out_dim").get<Eigen::Index>();
      const auto in_dim = jl.at("in_dim").get<Eigen::Index>();
      const auto weight = jl.at("weight").get<std::vector<double>>();
      const auto bias = jl.at("bias").get<std::vector<double>>();
      if (out_dim <= 0 || in_dim <= 0 || static_cast<Eigen::Index>(weight.size()) != out_dim * in_dim) {
        throw Error(ErrorCode::kDimensionChain,
                    "layer " + std::to_string(m.layers.size()) + " weight has " +
                        std::to_string(weight.size()) + " values for " + std::to_string(out_dim) +
                        "x" + std::to_string(in_dim));
      }
      LayerSpec layer;
      layer.activation = activation_from_string(jl.at("activation").get<std::string>());
      layer.weight = Eigen::Map<const Matrix>(weight.data(), out_dim, in_dim);
      layer.bias = Eigen::Map<const Vector>(bias.data(), static_cast<Eigen::Index>(bias.size()));
      m.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  validate(m);
  return m;
}

inline AcousticModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

inline void save_model(const AcousticModel& m, const std::filesystem::path& path) {
  detail::write_file_bytes(path, model_to_json(m).dump() + "\n");
}

}  // namespace agekit
