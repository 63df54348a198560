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

#ifndef QNET_IO_H_
#define QNET_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/calibrator.h"
#include "qnet/dataset.h"
#include "qnet/network.h"
#include "qnet/tensor.h"

namespace qnet {

// ---------------------------------------------------------------------------
// CNNW weight container, little-endian:
//
//   "CNNW"  u32 version (=1)  u32 entry_count
//   per entry:
//     u16 name_length, name bytes (UTF-8)
//     u8 dtype (0 = float32), u8 rank, rank x u32 dims
//     row-major float32 payload
//
// Nothing may follow the last entry.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kWeightsVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

std::vector<std::byte> encode_weights(std::span<const NamedTensor> tensors);
// Throws FormatError on bad magic, unknown version/dtype, truncation, trailing
// bytes, duplicate names or non-finite payload values.
std::vector<NamedTensor> decode_weights(std::span<const std::byte> bytes);

void write_weights(const std::filesystem::path& path,
                   std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_weights(const std::filesystem::path& path);

// Descriptor: JSON object with "input_shape" and an ordered "layers" list.
// Each layer has "name" and "type" plus per-type fields:
//   conv2d           out_channels, kernel ([h, w] or n), stride=1, pad=0,
//                    bias=true
//   fully_connected  out_features, bias=true
//   relu
//   maxpool          window, stride (defaults to window)
// Any other type (lrn, ...) is rejected with a StructuralError naming the
// layer.
struct ModelDescriptor {
  std::string name;
  Shape input_shape;
  std::vector<Layer> layers;
};

ModelDescriptor parse_descriptor(std::string_view json_text);
std::string format_descriptor(const ModelDescriptor& descriptor);

// Pairs "<layer>.weight" / "<layer>.bias" entries with descriptor layers and
// builds the validated graph.
NetworkGraph assemble_network(const ModelDescriptor& descriptor,
                              std::vector<NamedTensor> tensors);

NetworkGraph load_model(const std::filesystem::path& descriptor_path,
                        const std::filesystem::path& weights_path);

// Writes descriptor and weights for `net`.
void save_model(const NetworkGraph& net, std::string_view name,
                const std::filesystem::path& descriptor_path,
                const std::filesystem::path& weights_path);

// MNIST IDX pair. Images become 1x28x28 tensors with pixel/255 in [0, 1].
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

Dataset load_mnist(const std::filesystem::path& images_path,
                   const std::filesystem::path& labels_path);

// Calibration profile plus the scales chosen under one policy.
void write_profile(const std::filesystem::path& path,
                   const CalibrationProfile& profile, const ScaleSet& scales);

struct StoredProfile {
  CalibrationProfile profile;
  ScaleSet scales;
};

StoredProfile read_profile(const std::filesystem::path& path);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace qnet

#endif  // QNET_IO_H_
