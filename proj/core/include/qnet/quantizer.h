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

#ifndef QNET_QUANTIZER_H_
#define QNET_QUANTIZER_H_

#include <compare>
#include <cstdint>
#include <vector>

#include "qnet/tensor.h"

namespace qnet {

inline constexpr int kMinBits = 1;
inline constexpr int kMaxBits = 16;

// Scale used for all-zero tensors: 2^-16.
inline constexpr int kMinScaleExponent = -16;

// A signed fixed-point grid: `bits` two's-complement codes spanning
// [-scale, scale - step] with scale = 2^scale_exponent and
// step = scale / 2^(bits-1).
class QuantSpec {
 public:
  // Throws ValidationError unless 1 <= bits <= 16 and the exponent is within
  // [-64, 64].
  QuantSpec(int bits, int scale_exponent);

  // `scale` must be an exact power of two.
  static QuantSpec FromScale(int bits, double scale);

  int bits() const { return bits_; }
  int scale_exponent() const { return scale_exponent_; }
  double scale() const;
  double step() const;
  std::int32_t min_code() const { return -(std::int32_t{1} << (bits_ - 1)); }
  std::int32_t max_code() const {
    return (std::int32_t{1} << (bits_ - 1)) - 1;
  }

  QuantSpec with_bits(int bits) const {
    return QuantSpec(bits, scale_exponent_);
  }

  friend auto operator<=>(const QuantSpec&, const QuantSpec&) = default;

 private:
  int bits_;
  int scale_exponent_;
};

// Exponent k of the smallest 2^k >= max_abs; kMinScaleExponent when
// max_abs is 0 (or below 2^-16).
int next_pow2_exponent(double max_abs);
double next_pow2_scale(double max_abs);

// round-half-away-from-zero(x / step), saturated to the code range.
std::int32_t quantize(double x, const QuantSpec& spec);
double dequantize(std::int32_t code, const QuantSpec& spec);

struct QuantizedTensor {
  Shape shape;
  std::vector<std::int32_t> codes;
  QuantSpec spec;
};

QuantizedTensor quantize(const Tensor& t, const QuantSpec& spec);
Tensor dequantize(const QuantizedTensor& q);

// quantize followed by dequantize, elementwise.
Tensor fake_quantize(const Tensor& t, const QuantSpec& spec);

// Fraction of codes equal to zero; 0 for an empty tensor.
double zero_fraction(const QuantizedTensor& q);

}  // namespace qnet

#endif  // QNET_QUANTIZER_H_
