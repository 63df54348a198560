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

#ifndef QNET_DATASET_H_
#define QNET_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qnet/tensor.h"

namespace qnet {

struct Sample {
  Tensor image;
  int label = 0;
};

using Dataset = std::vector<Sample>;

// Deterministic subset of at most `limit` samples drawn with `seed`, kept in
// ascending source order. Returns everything when limit == 0 or
// limit >= samples.size().
Dataset select_subset(std::span<const Sample> samples, std::size_t limit,
                      std::uint64_t seed);

}  // namespace qnet

#endif  // QNET_DATASET_H_
