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

#include <gtest/gtest.h>

#include <random>

#include "oracles.h"
#include "properties.h"
#include "qnet/error.h"
#include "qnet/quantizer.h"
#include "toy_nets.h"

namespace qnet {
namespace {

using ::qnet::testing::PowerOfTwoByEnumeration;

TEST(NextPow2Test, Examples) {
  EXPECT_EQ(next_pow2_scale(0.43), 0.5);
  EXPECT_EQ(next_pow2_scale(1.0), 1.0);
  EXPECT_EQ(next_pow2_scale(0.6), 1.0);
  EXPECT_EQ(next_pow2_scale(0.0625), 0.0625);
  EXPECT_EQ(next_pow2_scale(3.0), 4.0);
}

TEST(NextPow2Test, ZeroFallsBackToMinimumScale) {
  EXPECT_EQ(next_pow2_exponent(0.0), kMinScaleExponent);
  EXPECT_EQ(next_pow2_scale(0.0), std::ldexp(1.0, -16));
  EXPECT_EQ(next_pow2_scale(1e-9), std::ldexp(1.0, -16));
}

TEST(NextPow2Test, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(next_pow2_scale(-0.1), ValidationError);
  EXPECT_THROW(next_pow2_scale(std::numeric_limits<double>::infinity()),
               ValidationError);
}

TEST(NextPow2Test, MatchesEnumerationOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> exponent(-15.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::pow(2.0, exponent(rng));
    ASSERT_EQ(next_pow2_scale(x), PowerOfTwoByEnumeration(x)) << x;
    ASSERT_GE(next_pow2_scale(x), x);
  }
  for (int k = -16; k < 20; ++k) {
    EXPECT_EQ(next_pow2_scale(std::ldexp(1.0, k)), std::ldexp(1.0, k));
  }
}

TEST(QuantSpecTest, Validation) {
  EXPECT_THROW(QuantSpec(0, 0), ValidationError);
  EXPECT_THROW(QuantSpec(17, 0), ValidationError);
  EXPECT_NO_THROW(QuantSpec(1, 0));
  EXPECT_NO_THROW(QuantSpec(16, 0));
  EXPECT_THROW(QuantSpec::FromScale(8, 0.3), ValidationError);
  EXPECT_THROW(QuantSpec::FromScale(8, 0.0), ValidationError);
  EXPECT_EQ(QuantSpec::FromScale(8, 0.5).scale_exponent(), -1);
}

TEST(QuantSpecTest, GridGeometry) {
  const QuantSpec spec = QuantSpec::FromScale(4, 0.5);
  EXPECT_EQ(spec.step(), 0.0625);
  EXPECT_EQ(spec.min_code(), -8);
  EXPECT_EQ(spec.max_code(), 7);
  const QuantSpec one_bit(1, 0);
  EXPECT_EQ(one_bit.min_code(), -1);
  EXPECT_EQ(one_bit.max_code(), 0);
  EXPECT_EQ(one_bit.step(), 1.0);
}

TEST(QuantizeTest, Examples) {
  const QuantSpec spec = QuantSpec::FromScale(4, 0.5);
  EXPECT_EQ(quantize(0.0, spec), 0);
  EXPECT_EQ(quantize(1.0, spec), 7);
  EXPECT_EQ(quantize(0.3, spec), 5);
  EXPECT_EQ(quantize(-1.0, spec), -8);
}

TEST(QuantizeTest, HalfwayRoundsAwayFromZero) {
  const QuantSpec spec = QuantSpec::FromScale(4, 0.5);
  EXPECT_EQ(quantize(0.03125, spec), 1);
  EXPECT_EQ(quantize(-0.03125, spec), -1);
  EXPECT_EQ(quantize(0.09375, spec), 2);
}

TEST(FakeQuantizeTest, Examples) {
  const QuantSpec spec = QuantSpec::FromScale(4, 0.5);
  const Tensor t({3}, {0.3f, -1.0f, 0.26f});
  EXPECT_EQ(fake_quantize(t, spec), Tensor({3}, {0.3125f, -0.5f, 0.25f}));

  const Tensor zeros({5});
  EXPECT_EQ(fake_quantize(zeros, spec), zeros);

  const Tensor on_grid({3}, {0.125f, -0.5f, 0.4375f});
  EXPECT_EQ(fake_quantize(on_grid, spec), on_grid);
}

TEST(ZeroFractionTest, Examples) {
  const QuantSpec spec(4, 0);
  EXPECT_EQ(zero_fraction(QuantizedTensor{{4}, {0, 0, 0, 0}, spec}), 1.0);
  EXPECT_EQ(zero_fraction(QuantizedTensor{{4}, {0, 3, 0, -2}, spec}), 0.5);
}

TEST(ZeroFractionTest, SmallValuesAllRoundToZero) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 16; ++n) {
    const QuantSpec spec(n, 0);
    const double half = spec.step() / 2;
    const Tensor t = testing::RandomTensor({100}, rng, -half * 0.999,
                                           half * 0.999);
    EXPECT_EQ(zero_fraction(quantize(t, spec)), 1.0) << "n=" << n;
  }
}

TEST(QuantizerPropertyTest, RandomPairs) {
  const auto report = testing::CheckQuantizerProperties(10000, 1234);
  EXPECT_TRUE(report.ok());
  for (const auto& f : report.failures) ADD_FAILURE() << f;
}

}  // namespace
}  // namespace qnet
