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

#ifndef QNET_INFERENCE_H_
#define QNET_INFERENCE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/dataset.h"
#include "qnet/network.h"
#include "qnet/quantizer.h"
#include "qnet/tensor.h"

namespace qnet {

enum class Mode { kFloat, kQuantized };

// Input and weight grids of one Conv2D/FullyConnected layer.
struct LayerQuant {
  std::string layer;
  QuantSpec input;
  QuantSpec weight;

  friend bool operator==(const LayerQuant&, const LayerQuant&) = default;
};

// One operating point: a grid pair for every weight-bearing layer, in network
// order. Float mode ignores `layers`.
struct QuantConfig {
  Mode mode = Mode::kFloat;
  std::vector<LayerQuant> layers;

  static QuantConfig Float() { return {}; }

  const LayerQuant& at(std::string_view layer) const;
  LayerQuant& at(std::string_view layer);

  friend bool operator==(const QuantConfig&, const QuantConfig&) = default;
};

// Throws ValidationError unless a quantized config lists exactly the
// weight-bearing layers of `net`, in order.
void validate(const QuantConfig& config, const NetworkGraph& net);

// Per-layer counters. A single forward pass yields samples == 1; traces from
// many images are merged by summing counters and taking maxima, so merging is
// order-independent.
struct LayerTrace {
  std::string layer;
  std::uint64_t samples = 0;
  std::uint64_t input_zeros = 0;
  std::uint64_t input_elements = 0;
  std::uint64_t weight_zeros = 0;
  std::uint64_t weight_elements = 0;
  std::uint64_t total_macs = 0;
  std::uint64_t skipped_macs = 0;
  double input_max_abs = 0.0;
  double output_max_abs = 0.0;

  std::uint64_t executed_macs() const { return total_macs - skipped_macs; }
  double input_zero_fraction() const;
  double weight_zero_fraction() const;

  void merge(const LayerTrace& other);

  friend bool operator==(const LayerTrace&, const LayerTrace&) = default;
};

// One entry per network layer (non weight-bearing layers carry only maxima).
using NetworkTrace = std::vector<LayerTrace>;

void merge(NetworkTrace& into, const NetworkTrace& from);

struct ForwardResult {
  Tensor logits;
  NetworkTrace trace;
};

// A network bound to one QuantConfig with weights and biases already
// fake-quantized. Biases use the weight bit width and their own power-of-two
// scale. Holds a reference to `net`, which must outlive it.
class PreparedNetwork {
 public:
  PreparedNetwork(const NetworkGraph& net, QuantConfig config);

  // In quantized mode every weight-bearing layer first rounds its input onto
  // the input grid; accumulation then runs at full precision. Zero and skip
  // counters are filled only in quantized mode.
  ForwardResult forward(const Tensor& image) const;

  const NetworkGraph& net() const { return *net_; }
  const QuantConfig& config() const { return config_; }

 private:
  struct Prepared {
    const LayerQuant* quant = nullptr;
    Tensor weight;
    std::optional<Tensor> bias;
    std::uint64_t weight_zeros = 0;
    // Conv: nonzero weights over output channels for each (in_channel, tap).
    // FC: nonzero weights in each input column.
    std::vector<std::uint64_t> nonzero_per_tap;
  };

  const NetworkGraph* net_;
  QuantConfig config_;
  std::vector<Prepared> layers_;
};

ForwardResult forward(const NetworkGraph& net, const Tensor& image,
                      const QuantConfig& config);

struct SkipCount {
  std::uint64_t total = 0;
  std::uint64_t skipped = 0;

  friend bool operator==(const SkipCount&, const SkipCount&) = default;
};

// Exact count of the layer's MACs whose activation code or weight code is
// zero. Zero padding counts as a zero activation.
SkipCount count_skips(const QuantizedTensor& input,
                      const QuantizedTensor& weight, const LayerSpec& layer);

struct EvalOptions {
  std::size_t top_k = 1;
  // 0 evaluates every sample.
  std::size_t sample_limit = 1000;
  // 0 selects std::thread::hardware_concurrency().
  std::size_t workers = 0;
};

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t evaluated = 0;
  NetworkTrace trace;
};

// Top-k accuracy over the first min(sample_limit, samples.size()) samples.
// Ties between logits rank the lower class index first.
EvalResult evaluate_accuracy(const NetworkGraph& net,
                             std::span<const Sample> samples,
                             const QuantConfig& config,
                             const EvalOptions& options);
EvalResult evaluate_accuracy(const PreparedNetwork& prepared,
                             std::span<const Sample> samples,
                             const EvalOptions& options);

// True when `label` is among the top-k entries of `logits`.
bool in_top_k(std::span<const float> logits, int label, std::size_t k);

std::size_t resolve_workers(std::size_t requested);

}  // namespace qnet

#endif  // QNET_INFERENCE_H_
