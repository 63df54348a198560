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

#include "qnet/dataset.h"

#include <algorithm>
#include <numeric>
#include <random>

namespace qnet {

Dataset select_subset(std::span<const Sample> samples, std::size_t limit,
                      std::uint64_t seed) {
  if (limit == 0 || limit >= samples.size()) {
    return Dataset(samples.begin(), samples.end());
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates on raw engine output; std::uniform_int_distribution
  // is not specified bit-for-bit across standard libraries.
  std::mt19937_64 engine(seed);
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(engine() % (order.size() - i));
    std::swap(order[i], order[j]);
  }
  order.resize(limit);
  std::sort(order.begin(), order.end());
  Dataset subset;
  subset.reserve(limit);
  for (std::size_t i : order) subset.push_back(samples[i]);
  return subset;
}

}  // namespace qnet
