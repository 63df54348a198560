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

#ifndef QNET_OPERATING_POINT_H_
#define QNET_OPERATING_POINT_H_

#include <cstddef>
#include <optional>

#include "qnet/inference.h"

namespace qnet {

// Relative accuracies within this distance below a target still meet it;
// absorbs rounding in the ratio of two sample fractions.
inline constexpr double kTargetSlack = 1e-12;

inline bool meets_target(double relative_accuracy, double target) {
  return relative_accuracy >= target - kTargetSlack;
}

// A quantization config together with what it achieves on one sample set.
struct OperatingPoint {
  QuantConfig config;
  double accuracy = 0.0;
  // Float-mode accuracy on the same samples.
  double reference_accuracy = 0.0;
  double relative_accuracy = 0.0;
  std::size_t samples = 0;
  NetworkTrace trace;
  // Filled by the energy model.
  std::optional<double> relative_energy;

  // Averages over conv/fc layers of the per-layer zero fractions.
  double mean_input_zero_fraction() const;
  double mean_weight_zero_fraction() const;
};

}  // namespace qnet

#endif  // QNET_OPERATING_POINT_H_
