// Copyright 2026 The nlpr Authors. All Rights Reserved.
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

// JSON configuration: transform/metric parameters keyed exactly as
// gamma, l_taps, p_band, sigma_band, p_low, sigma_low, n_levels, alpha,
// beta, plus an optional "optimizer" object. Unknown keys are rejected.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlpr/nlp.hpp"
#include "nlpr/optimizer.hpp"

namespace nlpr {

inline OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
  OptimizerConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_iters")
      cfg.max_iters = value.get<int>();
    else if (key == "step_size")
      cfg.step_size = value.get<double>();
    else if (key == "beta1")
      cfg.beta1 = value.get<double>();
    else if (key == "beta2")
      cfg.beta2 = value.get<double>();
    else if (key == "epsilon")
      cfg.epsilon = value.get<double>();
    else if (key == "tol_rel")
      cfg.tol_rel = value.get<double>();
    else if (key == "seed")
      cfg.seed = value.get<long>();
    else
      throw config_error("unknown optimizer config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

struct JsonConfig {
  NlpParams params;
  OptimizerConfig optimizer;
  bool has_optimizer = false;
};

inline JsonConfig config_from_json(const nlohmann::json& j) {
  JsonConfig out;
  for (const auto& [key, value] : j.items()) {
    if (key == "gamma") {
      out.params.gamma = value.get<double>();
    } else if (key == "l_taps") {
      out.params.l_taps.taps = value.get<std::vector<double>>();
    } else if (key == "p_band") {
      const auto rows = value.get<std::vector<std::vector<double>>>();
      if (rows.empty() || rows.size() % 2 == 0)
        throw config_error("p_band must be a square matrix with odd side length");
      Kernel2D k;
      k.radius = static_cast<int>(rows.size()) / 2;
      for (const auto& row : rows) {
        if (row.size() != rows.size())
          throw config_error("p_band must be a square matrix");
        k.weights.insert(k.weights.end(), row.begin(), row.end());
      }
      out.params.p_band = std::move(k);
    } else if (key == "sigma_band") {
      out.params.sigma_band = value.get<double>();
    } else if (key == "p_low") {
      out.params.p_low = value.get<double>();
    } else if (key == "sigma_low") {
      out.params.sigma_low = value.get<double>();
    } else if (key == "n_levels") {
      out.params.n_levels = value.get<int>();
    } else if (key == "alpha") {
      out.params.alpha = value.get<double>();
    } else if (key == "beta") {
      out.params.beta = value.get<double>();
    } else if (key == "optimizer") {
      out.optimizer = optimizer_config_from_json(value);
      out.has_optimizer = true;
    } else {
      throw config_error("unknown parameter key '" + key + "'");
    }
  }
  out.params.validate();
  return out;
}

inline JsonConfig config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("config JSON parse error: ") + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config JSON type error: ") + e.what());
  }
}

}  // namespace nlpr
