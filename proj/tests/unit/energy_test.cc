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

#include "properties.h"
#include "qnet/calibrator.h"
#include "qnet/energy.h"
#include "qnet/error.h"
#include "toy_nets.h"

namespace qnet {
namespace {

EnergyCoefficients MultiplierOnly() {
  EnergyCoefficients c;
  c.add = 0.0;
  return c;
}

TEST(MacEnergyTest, MultiplierOnlyQuadraticLaw) {
  const EnergyCoefficients c = MultiplierOnly();
  EXPECT_EQ(mac_energy(8, 8, 100, c) / mac_energy(16, 16, 100, c), 0.25);
  for (int n = 1; n <= 16; ++n) {
    EXPECT_EQ(mac_energy(n, n, 9, c) / mac_energy(16, 16, 9, c),
              (n / 16.0) * (n / 16.0));
  }
  EXPECT_EQ(mac_energy(3, 5, 1, c), 15.0);
}

TEST(MacEnergyTest, AccumulatorWidth) {
  EXPECT_EQ(accumulator_bits(8, 4, 1), 12);
  EXPECT_EQ(accumulator_bits(8, 4, 2), 13);
  EXPECT_EQ(accumulator_bits(8, 4, 3), 14);
  EXPECT_EQ(accumulator_bits(8, 4, 4), 14);
  EXPECT_EQ(accumulator_bits(8, 4, 5), 15);
  EXPECT_EQ(accumulator_bits(16, 16, 1024), 42);
  EXPECT_EQ(accumulator_bits(16, 16, 1025), 43);
  EXPECT_THROW(accumulator_bits(8, 8, 0), ValidationError);

  EnergyCoefficients adder_only;
  adder_only.mul = 0.0;
  EXPECT_EQ(mac_energy(5, 7, 1, adder_only), 12.0);
}

TEST(MacEnergyTest, GrowsWithWidthsAndAccumulation) {
  const EnergyCoefficients c;
  for (int a = 1; a <= 16; ++a) {
    for (int b = 1; b <= 16; ++b) {
      if (a < 16) EXPECT_LT(mac_energy(a, b, 25, c), mac_energy(a + 1, b, 25, c));
      if (b < 16) EXPECT_LT(mac_energy(a, b, 25, c), mac_energy(a, b + 1, 25, c));
    }
  }
  // ceil(log2 K) is a step function: flat between powers of two, strictly
  // larger at each doubling.
  for (std::uint64_t k = 1; k < 5000; ++k) {
    EXPECT_LE(mac_energy(8, 8, k, c), mac_energy(8, 8, k + 1, c));
  }
  for (std::uint64_t k = 1; k < (1u << 20); k *= 2) {
    EXPECT_LT(mac_energy(8, 8, k, c), mac_energy(8, 8, 2 * k, c));
  }
}

TEST(MacEnergyTest, MemoryTerms) {
  EnergyCoefficients c;
  c.mul = 0.0;
  c.add = 0.0;
  c.reg = 1.0;
  c.wire = 0.5;
  c.sram = 2.0;
  EXPECT_EQ(mac_energy(4, 6, 10, c), 0.0);
  c.include_memory = true;
  EXPECT_EQ(mac_energy(4, 6, 10, c), 1.5 * 10 + 2 * 2.0 * 16);
}

TEST(MacEnergyTest, RejectsBadWidthsAndCoefficients) {
  const EnergyCoefficients c;
  EXPECT_THROW(mac_energy(0, 8, 1, c), ValidationError);
  EXPECT_THROW(mac_energy(8, 17, 1, c), ValidationError);
  EnergyCoefficients bad;
  bad.mul = -1.0;
  EXPECT_THROW(validate(bad), ValidationError);
  bad = EnergyCoefficients{};
  bad.n_max = 0;
  EXPECT_THROW(validate(bad), ValidationError);
}

TEST(LayerEnergyTest, Examples) {
  const EnergyCoefficients c;
  EXPECT_EQ(layer_energy(1000, 1000, 8, 8, 25, c), 0.0);
  EXPECT_EQ(layer_energy(1000, 0, 16, 16, 25, c),
            1000 * mac_energy(16, 16, 25, c));
  EXPECT_EQ(layer_energy(1000, 250, 4, 4, 25, c), 750 * mac_energy(4, 4, 25, c));
  EXPECT_THROW(layer_energy(10, 11, 8, 8, 25, c), ValidationError);
}

class NetworkEnergyTest : public ::testing::Test {
 protected:
  NetworkEnergyTest()
      : net_(testing::MakeSmallCnn(2)),
        data_(testing::MakeDataset(net_, 10, 3)),
        scales_(testing::CalibratedScales(net_, data_)) {}

  NetworkTrace Trace(const QuantConfig& config) const {
    return evaluate_accuracy(net_, data_, config, EvalOptions{1, 0, 1}).trace;
  }

  NetworkGraph net_;
  Dataset data_;
  ScaleSet scales_;
};

TEST_F(NetworkEnergyTest, SixteenBitNoSkipIsTheBaseline) {
  const QuantConfig config = uniform_config(scales_, 16);
  const EnergyReport r = network_energy(net_, Trace(config), config,
                                        EnergyCoefficients{}, Skipping::kOff);
  EXPECT_EQ(r.relative_energy, 1.0);
  EXPECT_EQ(r.total, r.baseline);
  ASSERT_EQ(r.layers.size(), 3u);
  for (const LayerEnergy& e : r.layers) {
    EXPECT_EQ(e.energy, e.baseline_energy);
    EXPECT_EQ(e.executed_macs, e.total_macs);
  }
}

TEST_F(NetworkEnergyTest, SkippingReducesSixteenBitEnergy) {
  const QuantConfig config = uniform_config(scales_, 16);
  const NetworkTrace trace = Trace(config);
  const EnergyReport r =
      network_energy(net_, trace, config, EnergyCoefficients{}, Skipping::kOn);
  EXPECT_LT(r.relative_energy, 1.0);
  EXPECT_GT(r.relative_energy, 0.0);
  for (const LayerEnergy& e : r.layers) {
    EXPECT_EQ(e.executed_macs, e.total_macs - e.skipped_macs);
  }
}

TEST_F(NetworkEnergyTest, Errors) {
  const QuantConfig config = uniform_config(scales_, 8);
  EXPECT_THROW(network_energy(net_, Trace(config), QuantConfig::Float(),
                              EnergyCoefficients{}, Skipping::kOn),
               ValidationError);
  NetworkTrace partial = Trace(config);
  partial.pop_back();
  EXPECT_THROW(network_energy(net_, partial, config, EnergyCoefficients{},
                              Skipping::kOn),
               ValidationError);
  NetworkTrace empty(net_.layers().size());
  EXPECT_THROW(network_energy(net_, empty, config, EnergyCoefficients{},
                              Skipping::kOn),
               ValidationError);
}

TEST(SkippingTest, ParseAndPrint) {
  EXPECT_EQ(parse_skipping("on"), Skipping::kOn);
  EXPECT_EQ(parse_skipping("off"), Skipping::kOff);
  EXPECT_EQ(to_string(Skipping::kOn), "on");
  EXPECT_THROW(parse_skipping("yes"), ValidationError);
}

TEST(EnergyPropertyTest, IdentitiesOnRandomNetworks) {
  const auto report = testing::CheckEnergyIdentities(3, 2024);
  EXPECT_TRUE(report.ok());
  for (const auto& f : report.failures) ADD_FAILURE() << f;
}

}  // namespace
}  // namespace qnet
