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

#include "qnet/cases.h"

#include <utility>

#include "qnet/error.h"

namespace qnet {

const EnergyCase& CaseReport::at(std::string_view label) const {
  for (const EnergyCase& c : cases) {
    if (c.label == label) return c;
  }
  throw ValidationError("no case '" + std::string(label) + "'");
}

CaseReport case_report(const NetworkGraph& net,
                       std::span<const Sample> samples,
                       const ScaleSet& scales, const SearchSettings& settings,
                       const EnergyCoefficients& coeffs,
                       const SearchObserver& observer) {
  validate(settings);
  validate(coeffs);
  AccuracyEvaluator evaluator(
      net, samples,
      EvalOptions{settings.top_k, settings.sample_limit, settings.workers});

  CaseReport report;
  auto add = [&](std::string label, std::string description,
                 OperatingPoint point, Skipping skipping) {
    EnergyReport energy = attach_energy(point, net, coeffs, skipping);
    report.cases.push_back({std::move(label), std::move(description),
                            std::move(point), std::move(energy)});
  };

  OperatingPoint full = evaluator.evaluate(uniform_config(scales, kMaxBits));
  add("A", "16-bit, per-layer scaling, no skipping", full, Skipping::kOff);

  // Lower the uniform width until relative accuracy first drops below 1.
  OperatingPoint uniform = full;
  report.uniform_bits = kMaxBits;
  for (int bits = kMaxBits - 1; bits >= settings.min_bits; --bits) {
    OperatingPoint candidate = evaluator.evaluate(uniform_config(scales, bits));
    if (!meets_target(candidate.relative_accuracy, 1.0)) break;
    uniform = std::move(candidate);
    report.uniform_bits = bits;
  }
  add("B", "per-layer scaling, uniform width at 100% relative accuracy",
      uniform, Skipping::kOff);
  add("C", "B with computation skipping", uniform, Skipping::kOn);

  report.greedy = greedy_search(net, samples, scales, settings, observer);
  add("D",
      "per-layer scaling, per-layer widths and computation skipping at "
      "target accuracy",
      report.greedy.point, Skipping::kOn);
  return report;
}

}  // namespace qnet
