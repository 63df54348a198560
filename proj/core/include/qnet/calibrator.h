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

#ifndef QNET_CALIBRATOR_H_
#define QNET_CALIBRATOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/dataset.h"
#include "qnet/inference.h"
#include "qnet/network.h"

namespace qnet {

// Observed magnitudes of one weight-bearing layer.
struct LayerRange {
  std::string layer;
  double input_max_abs = 0.0;
  double weight_max_abs = 0.0;

  friend bool operator==(const LayerRange&, const LayerRange&) = default;
};

struct CalibrationProfile {
  std::vector<LayerRange> layers;
  // Maximum over every input and weight maximum above.
  double global_max_abs = 0.0;
  std::size_t samples = 0;

  friend bool operator==(const CalibrationProfile&,
                         const CalibrationProfile&) = default;
};

// Runs the float network over the first min(sample_limit, samples.size())
// samples (0 = all) and records each weight-bearing layer's input maximum.
// Weight maxima come straight from the stored weights.
CalibrationProfile calibrate(const NetworkGraph& net,
                             std::span<const Sample> samples,
                             std::size_t sample_limit,
                             std::size_t workers = 0);

enum class ScalePolicy { kUniform, kPerLayer };

std::string_view to_string(ScalePolicy policy);
ScalePolicy parse_scale_policy(std::string_view text);

// Power-of-two scale exponents chosen for one layer.
struct LayerScales {
  std::string layer;
  int input_exponent = 0;
  int weight_exponent = 0;

  friend bool operator==(const LayerScales&, const LayerScales&) = default;
};

struct ScaleSet {
  ScalePolicy policy = ScalePolicy::kPerLayer;
  std::vector<LayerScales> layers;

  friend bool operator==(const ScaleSet&, const ScaleSet&) = default;
};

// kPerLayer rounds every maximum up to its own power of two; kUniform uses
// the global maximum for every input and weight.
ScaleSet derive_scales(const CalibrationProfile& profile, ScalePolicy policy);

// Every input and weight of every layer at `bits` on the given scales.
QuantConfig uniform_config(const ScaleSet& scales, int bits);

}  // namespace qnet

#endif  // QNET_CALIBRATOR_H_
