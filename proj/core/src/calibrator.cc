/* Copyright 2026 The qnet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "qnet/calibrator.h"

#include <algorithm>

#include "qnet/error.h"
#include "qnet/quantizer.h"

namespace qnet {

CalibrationProfile calibrate(const NetworkGraph& net,
                             std::span<const Sample> samples,
                             std::size_t sample_limit, std::size_t workers) {
  if (samples.empty()) throw ValidationError("calibration dataset is empty");
  // Labels play no part in calibration; top-1 keeps evaluate_accuracy happy.
  const EvalResult run = evaluate_accuracy(
      net, samples, QuantConfig::Float(),
      EvalOptions{.top_k = 1, .sample_limit = sample_limit, .workers = workers});

  CalibrationProfile profile;
  profile.samples = run.evaluated;
  for (std::size_t i : net.weight_bearing()) {
    const Layer& layer = net.layers()[i];
    LayerRange range{layer.name, run.trace[i].input_max_abs,
                     net.params(layer.name).weight.max_abs()};
    profile.global_max_abs = std::max(
        {profile.global_max_abs, range.input_max_abs, range.weight_max_abs});
    profile.layers.push_back(std::move(range));
  }
  return profile;
}

std::string_view to_string(ScalePolicy policy) {
  return policy == ScalePolicy::kUniform ? "uniform" : "per-layer";
}

ScalePolicy parse_scale_policy(std::string_view text) {
  if (text == "uniform") return ScalePolicy::kUniform;
  if (text == "per-layer") return ScalePolicy::kPerLayer;
  throw ValidationError("unknown scaling policy '" + std::string(text) +
                        "' (expected uniform or per-layer)");
}

ScaleSet derive_scales(const CalibrationProfile& profile, ScalePolicy policy) {
  ScaleSet scales{policy, {}};
  const int global = next_pow2_exponent(profile.global_max_abs);
  for (const LayerRange& range : profile.layers) {
    if (policy == ScalePolicy::kUniform) {
      scales.layers.push_back({range.layer, global, global});
    } else {
      scales.layers.push_back({range.layer,
                               next_pow2_exponent(range.input_max_abs),
                               next_pow2_exponent(range.weight_max_abs)});
    }
  }
  return scales;
}

QuantConfig uniform_config(const ScaleSet& scales, int bits) {
  QuantConfig config{Mode::kQuantized, {}};
  for (const LayerScales& s : scales.layers) {
    config.layers.push_back({s.layer, QuantSpec(bits, s.input_exponent),
                             QuantSpec(bits, s.weight_exponent)});
  }
  return config;
}

}  // namespace qnet
