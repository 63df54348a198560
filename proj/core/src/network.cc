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

#include "qnet/network.h"

#include <algorithm>
#include <set>
#include <type_traits>
#include <utility>

#include "qnet/error.h"

namespace qnet {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void ShapeError(const Layer& layer, const Shape& in,
                             const std::string& why) {
  throw StructuralError("layer '" + layer.name + "' (" +
                        std::string(kind_name(layer.spec)) +
                        ") cannot take input " + to_string(in) + ": " + why);
}

void CheckHyperparameters(const Layer& layer) {
  std::visit(
      Overloaded{
          [&](const Conv2D& c) {
            if (c.out_channels == 0 || c.kernel_h == 0 || c.kernel_w == 0 ||
                c.stride == 0) {
              throw StructuralError("layer '" + layer.name +
                                    "': conv channels/kernel/stride must be "
                                    ">= 1");
            }
          },
          [&](const FullyConnected& f) {
            if (f.out_features == 0) {
              throw StructuralError("layer '" + layer.name +
                                    "': out_features must be >= 1");
            }
          },
          [](const ReLU&) {},
          [&](const MaxPool& p) {
            if (p.window == 0 || p.stride == 0) {
              throw StructuralError("layer '" + layer.name +
                                    "': pool window/stride must be >= 1");
            }
          },
      },
      layer.spec);
}

Shape OutputShape(const Layer& layer, const Shape& in) {
  CheckHyperparameters(layer);
  return std::visit(
      Overloaded{
          [&](const Conv2D& c) -> Shape {
            if (in.size() != 3) ShapeError(layer, in, "expected C x H x W");
            const std::size_t h = in[1] + 2 * c.pad;
            const std::size_t w = in[2] + 2 * c.pad;
            if (h < c.kernel_h || w < c.kernel_w) {
              ShapeError(layer, in, "kernel larger than padded input");
            }
            return {c.out_channels, (h - c.kernel_h) / c.stride + 1,
                    (w - c.kernel_w) / c.stride + 1};
          },
          [&](const FullyConnected& f) -> Shape {
            if (in.empty() || element_count(in) == 0) {
              ShapeError(layer, in, "empty input");
            }
            return {f.out_features};
          },
          [&](const ReLU&) -> Shape { return in; },
          [&](const MaxPool& p) -> Shape {
            if (in.size() != 3) ShapeError(layer, in, "expected C x H x W");
            if (in[1] < p.window || in[2] < p.window) {
              ShapeError(layer, in, "window larger than input");
            }
            return {in[0], (in[1] - p.window) / p.stride + 1,
                    (in[2] - p.window) / p.stride + 1};
          },
      },
      layer.spec);
}

}  // namespace

bool is_weight_bearing(const LayerSpec& spec) {
  return std::holds_alternative<Conv2D>(spec) ||
         std::holds_alternative<FullyConnected>(spec);
}

std::string_view kind_name(const LayerSpec& spec) {
  return std::visit(Overloaded{
                        [](const Conv2D&) { return std::string_view("conv2d"); },
                        [](const FullyConnected&) {
                          return std::string_view("fully_connected");
                        },
                        [](const ReLU&) { return std::string_view("relu"); },
                        [](const MaxPool&) { return std::string_view("maxpool"); },
                    },
                    spec);
}

std::vector<Shape> infer_shapes(const Shape& input_shape,
                                const std::vector<Layer>& layers) {
  if (layers.empty()) throw StructuralError("network has no layers");
  if (input_shape.empty() || element_count(input_shape) == 0) {
    throw StructuralError("network input shape " + to_string(input_shape) +
                          " is empty");
  }
  std::vector<Shape> shapes;
  shapes.reserve(layers.size());
  const Shape* in = &input_shape;
  for (const Layer& layer : layers) {
    shapes.push_back(OutputShape(layer, *in));
    in = &shapes.back();
  }
  return shapes;
}

std::uint64_t layer_macs(const LayerSpec& spec, const Shape& in,
                         const Shape& out) {
  if (!is_weight_bearing(spec)) return 0;
  return static_cast<std::uint64_t>(element_count(out)) *
         accumulation_length(spec, in);
}

std::uint64_t accumulation_length(const LayerSpec& spec, const Shape& in) {
  if (const auto* c = std::get_if<Conv2D>(&spec)) {
    return static_cast<std::uint64_t>(in.at(0)) * c->kernel_h * c->kernel_w;
  }
  if (std::holds_alternative<FullyConnected>(spec)) {
    return element_count(in);
  }
  return 0;
}

Shape expected_weight_shape(const LayerSpec& spec, const Shape& in) {
  if (const auto* c = std::get_if<Conv2D>(&spec)) {
    return {c->out_channels, in.at(0), c->kernel_h, c->kernel_w};
  }
  if (const auto* f = std::get_if<FullyConnected>(&spec)) {
    return {f->out_features, element_count(in)};
  }
  return {};
}

NetworkGraph::NetworkGraph(Shape input_shape, std::vector<Layer> layers,
                           std::map<std::string, LayerParams> params)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  output_shapes_ = infer_shapes(input_shape_, layers_);

  std::set<std::string, std::less<>> names;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (layer.name.empty()) {
      throw StructuralError("layer " + std::to_string(i) + " has no name");
    }
    if (!names.insert(layer.name).second) {
      throw StructuralError("duplicate layer name '" + layer.name + "'");
    }
    if (!is_weight_bearing(layer.spec)) continue;
    weight_bearing_.push_back(i);

    auto it = params.find(layer.name);
    if (it == params.end()) {
      throw StructuralError("layer '" + layer.name + "' has no weights");
    }
    const Shape& in = layer_input_shape(i);
    const Shape want = expected_weight_shape(layer.spec, in);
    if (it->second.weight.shape() != want) {
      throw StructuralError("layer '" + layer.name + "' weight shape " +
                            to_string(it->second.weight.shape()) +
                            ", expected " + to_string(want));
    }
    const bool has_bias = std::visit(
        Overloaded{[](const Conv2D& c) { return c.has_bias; },
                   [](const FullyConnected& f) { return f.has_bias; },
                   [](const auto&) { return false; }},
        layer.spec);
    const auto& bias = it->second.bias;
    if (has_bias != bias.has_value()) {
      throw StructuralError("layer '" + layer.name + "' bias presence (" +
                            (bias ? "present" : "absent") +
                            ") disagrees with has_bias");
    }
    if (bias && bias->shape() != Shape{want[0]}) {
      throw StructuralError("layer '" + layer.name + "' bias shape " +
                            to_string(bias->shape()) + ", expected " +
                            std::to_string(want[0]));
    }
  }
  for (auto& [name, p] : params) {
    auto idx = std::find_if(layers_.begin(), layers_.end(),
                            [&](const Layer& l) { return l.name == name; });
    if (idx == layers_.end() || !is_weight_bearing(idx->spec)) {
      throw StructuralError("weight entry '" + name +
                            "' does not belong to a conv/fc layer");
    }
    params_.emplace(name, std::move(p));
  }
}

const Shape& NetworkGraph::layer_input_shape(std::size_t index) const {
  return index == 0 ? input_shape_ : output_shapes_.at(index - 1);
}

const LayerParams& NetworkGraph::params(std::string_view layer_name) const {
  auto it = params_.find(layer_name);
  if (it == params_.end()) {
    throw StructuralError("no weights for layer '" + std::string(layer_name) +
                          "'");
  }
  return it->second;
}

std::optional<std::size_t> NetworkGraph::find_layer(
    std::string_view name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<Shape> infer_shapes(const NetworkGraph& net) {
  return infer_shapes(net.input_shape(), net.layers());
}

std::map<std::string, std::uint64_t> mac_count(const NetworkGraph& net) {
  std::map<std::string, std::uint64_t> counts;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const Layer& layer = net.layers()[i];
    counts[layer.name] = layer_macs(layer.spec, net.layer_input_shape(i),
                                    net.output_shapes()[i]);
  }
  return counts;
}

std::uint64_t total_macs(const NetworkGraph& net) {
  std::uint64_t total = 0;
  for (const auto& [name, macs] : mac_count(net)) total += macs;
  return total;
}

}  // namespace qnet
