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

#ifndef QNET_TENSOR_H_
#define QNET_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qnet {

// Dimensions, outermost first. Activations are (channels, height, width);
// conv weights are (out_channels, in_channels, kernel_h, kernel_w).
using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

// Dense row-major float tensor. Values are always finite.
class Tensor {
 public:
  Tensor() = default;
  // Zero-filled tensor of the given shape.
  explicit Tensor(Shape shape);
  // Throws ValidationError when the value count disagrees with the shape or
  // any value is NaN/infinite.
  Tensor(Shape shape, std::vector<float> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const float> values() const { return values_; }
  std::span<float> mutable_values() { return values_; }

  float operator[](std::size_t i) const { return values_[i]; }
  float& operator[](std::size_t i) { return values_[i]; }

  // Largest |value|, 0 for an empty tensor.
  double max_abs() const;

  // Same values under a new shape with identical element count.
  Tensor reshaped(Shape shape) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> values_;
};

}  // namespace qnet

#endif  // QNET_TENSOR_H_
