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

#ifndef QNET_CASES_H_
#define QNET_CASES_H_

#include <span>
#include <string>
#include <vector>

#include "qnet/calibrator.h"
#include "qnet/energy.h"
#include "qnet/search.h"

namespace qnet {

struct EnergyCase {
  std::string label;
  std::string description;
  OperatingPoint point;
  EnergyReport energy;
};

// The four reference configurations, always in order A, B, C, D:
//   A  16-bit everywhere, no skipping (the baseline, relative energy 1)
//   B  smallest uniform width keeping relative accuracy at 1, no skipping
//   C  B with zero-operand skipping
//   D  greedy per-layer widths at settings.target, with skipping
// All four use `scales`, which should come from the per-layer policy.
struct CaseReport {
  std::vector<EnergyCase> cases;
  // Full greedy outcome behind case D.
  GreedyResult greedy;
  int uniform_bits = 0;

  const EnergyCase& at(std::string_view label) const;
};

CaseReport case_report(const NetworkGraph& net,
                       std::span<const Sample> samples,
                       const ScaleSet& scales, const SearchSettings& settings,
                       const EnergyCoefficients& coeffs,
                       const SearchObserver& observer = {});

}  // namespace qnet

#endif  // QNET_CASES_H_
