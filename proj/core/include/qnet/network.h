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

#ifndef QNET_NETWORK_H_
#define QNET_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qnet/tensor.h"

namespace qnet {

struct Conv2D {
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;
  bool has_bias = true;
};

// Flattens its input; weight layout is (out_features, in_features).
struct FullyConnected {
  std::size_t out_features = 1;
  bool has_bias = true;
};

struct ReLU {};

struct MaxPool {
  std::size_t window = 2;
  std::size_t stride = 2;
};

using LayerSpec = std::variant<Conv2D, FullyConnected, ReLU, MaxPool>;

// Conv2D and FullyConnected are the only layers carrying weights and MACs.
bool is_weight_bearing(const LayerSpec& spec);
std::string_view kind_name(const LayerSpec& spec);

struct Layer {
  std::string name;
  LayerSpec spec;
};

struct LayerParams {
  Tensor weight;
  std::optional<Tensor> bias;
};

// Output shapes of every layer, in order. Throws StructuralError naming the
// first layer whose input cannot be consumed.
std::vector<Shape> infer_shapes(const Shape& input_shape,
                                const std::vector<Layer>& layers);

// Nominal multiply-accumulates of one layer given its input and output shape.
std::uint64_t layer_macs(const LayerSpec& spec, const Shape& in,
                         const Shape& out);

// Number of products summed into one output value (K); 0 for layers without
// arithmetic.
std::uint64_t accumulation_length(const LayerSpec& spec, const Shape& in);

// Expected weight tensor shape of a weight-bearing layer.
Shape expected_weight_shape(const LayerSpec& spec, const Shape& in);

// Immutable, validated network: input shape, ordered layers, named weights.
// Safe to share between threads once constructed.
class NetworkGraph {
 public:
  NetworkGraph(Shape input_shape, std::vector<Layer> layers,
               std::map<std::string, LayerParams> params);

  const Shape& input_shape() const { return input_shape_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const std::vector<Shape>& output_shapes() const { return output_shapes_; }
  const Shape& layer_input_shape(std::size_t index) const;

  // Indices into layers() of Conv2D/FullyConnected layers, in order.
  const std::vector<std::size_t>& weight_bearing() const {
    return weight_bearing_;
  }

  const LayerParams& params(std::string_view layer_name) const;
  const std::map<std::string, LayerParams, std::less<>>& all_params() const {
    return params_;
  }

  std::optional<std::size_t> find_layer(std::string_view name) const;

 private:
  Shape input_shape_;
  std::vector<Layer> layers_;
  std::map<std::string, LayerParams, std::less<>> params_;
  std::vector<Shape> output_shapes_;
  std::vector<std::size_t> weight_bearing_;
};

std::vector<Shape> infer_shapes(const NetworkGraph& net);

// MACs per layer name, before any skipping. ReLU and MaxPool report 0.
std::map<std::string, std::uint64_t> mac_count(const NetworkGraph& net);

std::uint64_t total_macs(const NetworkGraph& net);

}  // namespace qnet

#endif  // QNET_NETWORK_H_
