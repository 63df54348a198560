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

#ifndef QNET_SEARCH_H_
#define QNET_SEARCH_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/calibrator.h"
#include "qnet/dataset.h"
#include "qnet/inference.h"
#include "qnet/network.h"
#include "qnet/operating_point.h"
#include "qnet/quantizer.h"

namespace qnet {

struct SearchSettings {
  // Minimum accepted quantized / float accuracy, in (0, 1].
  double target = 0.99;
  int min_bits = kMinBits;
  int max_bits = kMaxBits;
  // Samples per accuracy evaluation; 0 = all.
  std::size_t sample_limit = 1000;
  std::size_t top_k = 1;
  std::size_t workers = 0;
};

// Throws ValidationError on an out-of-range field. Targets above 1 are
// allowed here; they simply make the search infeasible.
void validate(const SearchSettings& settings);

// Evaluates configs against a fixed sample set, reusing the float accuracy.
class AccuracyEvaluator {
 public:
  AccuracyEvaluator(const NetworkGraph& net, std::span<const Sample> samples,
                    EvalOptions options);

  double reference_accuracy() const { return reference_accuracy_; }
  std::size_t samples() const { return samples_count_; }

  OperatingPoint evaluate(const QuantConfig& config);

  // Quantized evaluations performed so far.
  std::size_t evaluations() const { return evaluations_; }

 private:
  const NetworkGraph* net_;
  std::span<const Sample> samples_;
  EvalOptions options_;
  std::size_t samples_count_ = 0;
  double reference_accuracy_ = 0.0;
  std::size_t evaluations_ = 0;
};

// One point per bit width, max_bits first. Every input and weight uses that
// width on the given scales.
std::vector<OperatingPoint> uniform_sweep(const NetworkGraph& net,
                                          std::span<const Sample> samples,
                                          const ScaleSet& scales,
                                          const SearchSettings& settings);

enum class Knob { kInput, kWeight };
std::string_view to_string(Knob knob);

// One candidate tried by the greedy search.
struct SearchEvent {
  std::string layer;
  Knob knob = Knob::kInput;
  int bits = 0;
  double relative_accuracy = 0.0;
  bool accepted = false;
};

using SearchObserver = std::function<void(const SearchEvent&)>;

struct GreedyResult {
  // False when even max_bits everywhere misses the target; `point` is then
  // the max_bits point.
  bool feasible = false;
  OperatingPoint point;
  // Candidates evaluated during the per-layer descents, excluding the
  // initial all-max_bits check.
  std::size_t candidate_evaluations = 0;
};

// Forward sweep over conv/fc layers. Each layer first lowers its input width
// one bit at a time until the target is missed, keeping the last width that
// met it, then does the same for its weights. Unvisited layers stay at
// max_bits.
GreedyResult greedy_search(const NetworkGraph& net,
                           std::span<const Sample> samples,
                           const ScaleSet& scales,
                           const SearchSettings& settings,
                           const SearchObserver& observer = {});

}  // namespace qnet

#endif  // QNET_SEARCH_H_
