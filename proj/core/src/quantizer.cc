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

#include "qnet/quantizer.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnet/error.h"

namespace qnet {

QuantSpec::QuantSpec(int bits, int scale_exponent)
    : bits_(bits), scale_exponent_(scale_exponent) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw ValidationError("bit width " + std::to_string(bits) +
                          " outside [1, 16]");
  }
  if (scale_exponent < -64 || scale_exponent > 64) {
    throw ValidationError("scale exponent " + std::to_string(scale_exponent) +
                          " outside [-64, 64]");
  }
}

QuantSpec QuantSpec::FromScale(int bits, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("scale must be positive and finite");
  }
  int exponent = 0;
  const double mantissa = std::frexp(scale, &exponent);
  if (mantissa != 0.5) {
    throw ValidationError("scale " + std::to_string(scale) +
                          " is not a power of two");
  }
  return QuantSpec(bits, exponent - 1);
}

double QuantSpec::scale() const { return std::ldexp(1.0, scale_exponent_); }

double QuantSpec::step() const {
  return std::ldexp(1.0, scale_exponent_ - (bits_ - 1));
}

int next_pow2_exponent(double max_abs) {
  if (!(max_abs >= 0.0) || !std::isfinite(max_abs)) {
    throw ValidationError("max_abs must be a finite nonnegative number");
  }
  if (max_abs == 0.0) return kMinScaleExponent;
  int exponent = 0;
  // max_abs = m * 2^exponent with m in [0.5, 1).
  const double mantissa = std::frexp(max_abs, &exponent);
  const int k = mantissa == 0.5 ? exponent - 1 : exponent;
  return std::max(k, kMinScaleExponent);
}

double next_pow2_scale(double max_abs) {
  return std::ldexp(1.0, next_pow2_exponent(max_abs));
}

std::int32_t quantize(double x, const QuantSpec& spec) {
  // Division by a power of two is exact, so x / step never rounds.
  const double ratio = std::ldexp(x, -(spec.scale_exponent() - (spec.bits() - 1)));
  const double rounded = std::round(ratio);
  if (rounded <= spec.min_code()) return spec.min_code();
  if (rounded >= spec.max_code()) return spec.max_code();
  return static_cast<std::int32_t>(rounded);
}

double dequantize(std::int32_t code, const QuantSpec& spec) {
  return std::ldexp(static_cast<double>(code),
                    spec.scale_exponent() - (spec.bits() - 1));
}

QuantizedTensor quantize(const Tensor& t, const QuantSpec& spec) {
  QuantizedTensor q{t.shape(), {}, spec};
  q.codes.reserve(t.size());
  for (float v : t.values()) q.codes.push_back(quantize(v, spec));
  return q;
}

Tensor dequantize(const QuantizedTensor& q) {
  std::vector<float> values;
  values.reserve(q.codes.size());
  for (std::int32_t c : q.codes) {
    values.push_back(static_cast<float>(dequantize(c, q.spec)));
  }
  return Tensor(q.shape, std::move(values));
}

Tensor fake_quantize(const Tensor& t, const QuantSpec& spec) {
  Tensor out = t;
  for (float& v : out.mutable_values()) {
    v = static_cast<float>(dequantize(quantize(v, spec), spec));
  }
  return out;
}

double zero_fraction(const QuantizedTensor& q) {
  if (q.codes.empty()) return 0.0;
  const auto zeros = std::count(q.codes.begin(), q.codes.end(), 0);
  return static_cast<double>(zeros) / static_cast<double>(q.codes.size());
}

}  // namespace qnet
