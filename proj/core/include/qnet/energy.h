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

#ifndef QNET_ENERGY_H_
#define QNET_ENERGY_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/inference.h"
#include "qnet/network.h"
#include "qnet/operating_point.h"

namespace qnet {

// Relative switching-activity weights of the arithmetic building blocks.
// Multiplier activity grows with the product of operand widths, adder,
// register and wire activity linearly with width, SRAM with the fixed word
// size n_max. Supply voltage, frequency and capacitance cancel in every ratio
// this module reports, so they have no field.
struct EnergyCoefficients {
  double mul = 1.0;
  double add = 1.0;
  double reg = 0.0;
  double wire = 0.0;
  double sram = 0.0;
  bool include_memory = false;
  int n_max = 16;

  friend bool operator==(const EnergyCoefficients&,
                         const EnergyCoefficients&) = default;
};

void validate(const EnergyCoefficients& coeffs);

// Accumulator width: b_in + b_w + ceil(log2(accumulation_length)).
int accumulator_bits(int input_bits, int weight_bits,
                     std::uint64_t accumulation_length);

// Energy of one executed MAC:
//   mul * b_in * b_w + add * b_acc
//   [+ (reg + wire) * (b_in + b_w) + 2 * sram * n_max  with include_memory]
double mac_energy(int input_bits, int weight_bits,
                  std::uint64_t accumulation_length,
                  const EnergyCoefficients& coeffs);

// (macs - skipped) * mac_energy(...). Skipped MACs cost nothing.
double layer_energy(std::uint64_t macs, std::uint64_t skipped, int input_bits,
                    int weight_bits, std::uint64_t accumulation_length,
                    const EnergyCoefficients& coeffs);

enum class Skipping { kOff, kOn };
std::string_view to_string(Skipping skipping);
Skipping parse_skipping(std::string_view text);

struct LayerEnergy {
  std::string layer;
  int input_bits = 0;
  int weight_bits = 0;
  std::uint64_t accumulation_length = 0;
  // Summed over every traced sample.
  std::uint64_t total_macs = 0;
  std::uint64_t skipped_macs = 0;
  std::uint64_t executed_macs = 0;
  double energy = 0.0;
  double baseline_energy = 0.0;
};

struct EnergyReport {
  Skipping skipping = Skipping::kOn;
  std::vector<LayerEnergy> layers;
  double total = 0.0;
  // Same MACs at 16/16 bits with nothing skipped.
  double baseline = 0.0;
  double relative_energy = 0.0;
};

// Energy of a quantized config from merged traces of the same config. With
// Skipping::kOff the traced skip counts are ignored.
EnergyReport network_energy(const NetworkGraph& net, const NetworkTrace& trace,
                            const QuantConfig& config,
                            const EnergyCoefficients& coeffs,
                            Skipping skipping);

// Computes the point's energy from its own trace and stores the relative
// value on it.
EnergyReport attach_energy(OperatingPoint& point, const NetworkGraph& net,
                           const EnergyCoefficients& coeffs,
                           Skipping skipping);

}  // namespace qnet

#endif  // QNET_ENERGY_H_
