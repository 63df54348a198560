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

#include "qnet/energy.h"

#include <bit>
#include <cmath>
#include <string>

#include "qnet/error.h"
#include "qnet/quantizer.h"

namespace qnet {

void validate(const EnergyCoefficients& c) {
  for (double v : {c.mul, c.add, c.reg, c.wire, c.sram}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("energy coefficients must be finite and >= 0");
    }
  }
  if (c.n_max < kMinBits || c.n_max > kMaxBits) {
    throw ValidationError("n_max must lie within [1, 16]");
  }
}

int accumulator_bits(int input_bits, int weight_bits,
                     std::uint64_t accumulation_length) {
  if (accumulation_length == 0) {
    throw ValidationError("accumulation length must be >= 1");
  }
  // bit_width(K - 1) == ceil(log2(K)) for K >= 1.
  return input_bits + weight_bits +
         static_cast<int>(std::bit_width(accumulation_length - 1));
}

double mac_energy(int input_bits, int weight_bits,
                  std::uint64_t accumulation_length,
                  const EnergyCoefficients& coeffs) {
  for (int b : {input_bits, weight_bits}) {
    if (b < kMinBits || b > kMaxBits) {
      throw ValidationError("operand width " + std::to_string(b) +
                            " outside [1, 16]");
    }
  }
  const double operand_bits = input_bits + weight_bits;
  double energy =
      coeffs.mul * input_bits * weight_bits +
      coeffs.add * accumulator_bits(input_bits, weight_bits, accumulation_length);
  if (coeffs.include_memory) {
    energy += (coeffs.reg + coeffs.wire) * operand_bits +
              2.0 * coeffs.sram * coeffs.n_max;
  }
  return energy;
}

double layer_energy(std::uint64_t macs, std::uint64_t skipped, int input_bits,
                    int weight_bits, std::uint64_t accumulation_length,
                    const EnergyCoefficients& coeffs) {
  if (skipped > macs) {
    throw ValidationError("skipped MACs exceed total MACs");
  }
  return static_cast<double>(macs - skipped) *
         mac_energy(input_bits, weight_bits, accumulation_length, coeffs);
}

std::string_view to_string(Skipping skipping) {
  return skipping == Skipping::kOn ? "on" : "off";
}

Skipping parse_skipping(std::string_view text) {
  if (text == "on") return Skipping::kOn;
  if (text == "off") return Skipping::kOff;
  throw ValidationError("skip mode must be 'on' or 'off', got '" +
                        std::string(text) + "'");
}

EnergyReport network_energy(const NetworkGraph& net, const NetworkTrace& trace,
                            const QuantConfig& config,
                            const EnergyCoefficients& coeffs,
                            Skipping skipping) {
  validate(coeffs);
  if (config.mode != Mode::kQuantized) {
    throw ValidationError("energy needs a quantized config (float has no bit "
                          "widths)");
  }
  validate(config, net);
  if (trace.size() != net.layers().size()) {
    throw ValidationError("trace covers " + std::to_string(trace.size()) +
                          " layers, network has " +
                          std::to_string(net.layers().size()));
  }

  EnergyReport report;
  report.skipping = skipping;
  for (std::size_t k = 0; k < net.weight_bearing().size(); ++k) {
    const std::size_t i = net.weight_bearing()[k];
    const Layer& layer = net.layers()[i];
    const LayerTrace& t = trace[i];
    if (t.samples == 0 || t.layer != layer.name) {
      throw ValidationError("missing trace for layer '" + layer.name + "'");
    }
    const LayerQuant& q = config.layers[k];
    LayerEnergy e;
    e.layer = layer.name;
    e.input_bits = q.input.bits();
    e.weight_bits = q.weight.bits();
    e.accumulation_length =
        accumulation_length(layer.spec, net.layer_input_shape(i));
    e.total_macs = t.total_macs;
    e.skipped_macs = skipping == Skipping::kOn ? t.skipped_macs : 0;
    e.executed_macs = e.total_macs - e.skipped_macs;
    e.energy = layer_energy(e.total_macs, e.skipped_macs, e.input_bits,
                            e.weight_bits, e.accumulation_length, coeffs);
    e.baseline_energy = layer_energy(e.total_macs, 0, kMaxBits, kMaxBits,
                                     e.accumulation_length, coeffs);
    report.total += e.energy;
    report.baseline += e.baseline_energy;
    report.layers.push_back(std::move(e));
  }
  report.relative_energy =
      report.baseline > 0.0 ? report.total / report.baseline : 0.0;
  return report;
}

EnergyReport attach_energy(OperatingPoint& point, const NetworkGraph& net,
                           const EnergyCoefficients& coeffs,
                           Skipping skipping) {
  EnergyReport report =
      network_energy(net, point.trace, point.config, coeffs, skipping);
  point.relative_energy = report.relative_energy;
  return report;
}

}  // namespace qnet
