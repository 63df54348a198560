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

#include "toy_nets.h"

#include <algorithm>
#include <cmath>

#include "oracles.h"

namespace qnet::testing {

Tensor RandomTensor(const Shape& shape, std::mt19937_64& rng, double lo,
                    double hi) {
  return SparseTensor(shape, rng, lo, hi, 0.0);
}

Tensor SparseTensor(const Shape& shape, std::mt19937_64& rng, double lo,
                    double hi, double zero_probability) {
  std::uniform_real_distribution<double> value(lo, hi);
  std::bernoulli_distribution zero(zero_probability);
  std::vector<float> v(element_count(shape));
  for (float& x : v) {
    const double draw = value(rng);
    x = zero(rng) ? 0.0f : static_cast<float>(draw);
  }
  return Tensor(shape, std::move(v));
}

NetworkGraph MakeMlp(std::uint64_t seed, std::size_t in, std::size_t hidden,
                     std::size_t out) {
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers = {{"fc1", FullyConnected{hidden, true}},
                               {"relu1", ReLU{}},
                               {"fc2", FullyConnected{out, true}}};
  std::map<std::string, LayerParams> params;
  params["fc1"] = {RandomTensor({hidden, in}, rng, -1, 1),
                   RandomTensor({hidden}, rng, -0.2, 0.2)};
  params["fc2"] = {RandomTensor({out, hidden}, rng, -1, 1),
                   RandomTensor({out}, rng, -0.2, 0.2)};
  return NetworkGraph({in}, std::move(layers), std::move(params));
}

NetworkGraph MakeSmallCnn(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers = {
      {"conv1", Conv2D{4, 3, 3, 1, 1, true}}, {"relu1", ReLU{}},
      {"pool1", MaxPool{2, 2}},               {"conv2", Conv2D{6, 3, 3, 1, 0, true}},
      {"relu2", ReLU{}},                      {"fc", FullyConnected{5, true}}};
  std::map<std::string, LayerParams> params;
  params["conv1"] = {RandomTensor({4, 2, 3, 3}, rng, -0.5, 0.5),
                     RandomTensor({4}, rng, -0.1, 0.1)};
  params["conv2"] = {RandomTensor({6, 4, 3, 3}, rng, -0.5, 0.5),
                     RandomTensor({6}, rng, -0.1, 0.1)};
  params["fc"] = {RandomTensor({5, 24}, rng, -0.5, 0.5),
                  RandomTensor({5}, rng, -0.1, 0.1)};
  return NetworkGraph({2, 8, 8}, std::move(layers), std::move(params));
}

NetworkGraph MakeConstantNet(std::size_t in) {
  std::map<std::string, LayerParams> params;
  params["fc"] = {Tensor({3, in}), Tensor({3}, {0.0f, -1.0f, -1.0f})};
  return NetworkGraph({in}, {{"fc", FullyConnected{3, true}}},
                      std::move(params));
}

Dataset MakeDataset(const NetworkGraph& net, std::size_t count,
                    std::uint64_t seed, double lo, double hi,
                    double label_noise) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution noisy(label_noise);
  Dataset data;
  for (std::size_t i = 0; i < count; ++i) {
    Tensor image = RandomTensor(net.input_shape(), rng, lo, hi);
    const auto logits = ReferenceForward(net, image, QuantConfig::Float());
    int label = static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (noisy(rng)) {
      label = static_cast<int>(rng() % logits.size());
    }
    data.push_back({std::move(image), label});
  }
  return data;
}

ScaleSet CalibratedScales(const NetworkGraph& net, const Dataset& data,
                          ScalePolicy policy) {
  return derive_scales(calibrate(net, data, 0, 1), policy);
}

}  // namespace qnet::testing
