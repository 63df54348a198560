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

#include "qnet/io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "qnet/error.h"

namespace qnet {
namespace {

using nlohmann::json;

constexpr std::string_view kWeightsMagic = "CNNW";
constexpr std::uint8_t kFloat32 = 0;

// Bounds-checked cursor over a byte buffer.
class ByteReader {
 public:
  ByteReader(std::span<const std::byte> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::span<const std::byte> take(std::size_t n) {
    if (n > remaining()) {
      throw FormatError(what_ + ": truncated at byte " + std::to_string(pos_) +
                        " (need " + std::to_string(n) + ", have " +
                        std::to_string(remaining()) + ")");
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint64_t little(std::size_t width) {
    std::uint64_t v = 0;
    auto b = take(width);
    for (std::size_t i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(b[i]))
           << (8 * i);
    }
    return v;
  }

  std::uint32_t big_u32() {
    std::uint32_t v = 0;
    for (std::byte b : take(4)) v = (v << 8) | std::to_integer<std::uint8_t>(b);
    return v;
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

void PutLittle(std::vector<std::byte>& out, std::uint64_t v,
               std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
  }
}

std::size_t JsonSize(const json& j, const std::string& key,
                     const std::string& layer) {
  if (!j.contains(key) || !j.at(key).is_number_integer() ||
      j.at(key).get<long long>() < 0) {
    throw StructuralError("layer '" + layer + "': field '" + key +
                          "' must be a nonnegative integer");
  }
  return j.at(key).get<std::size_t>();
}

std::size_t JsonSizeOr(const json& j, const std::string& key,
                       const std::string& layer, std::size_t fallback) {
  return j.contains(key) ? JsonSize(j, key, layer) : fallback;
}

bool JsonBoolOr(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) {
    throw StructuralError("field '" + key + "' must be boolean");
  }
  return j.at(key).get<bool>();
}

Layer ParseLayer(const json& j, std::size_t index) {
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string()) {
    throw StructuralError("layer " + std::to_string(index) +
                          " needs a string 'name'");
  }
  const std::string name = j.at("name").get<std::string>();
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw StructuralError("layer '" + name + "' needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "conv2d") {
    Conv2D c;
    c.out_channels = JsonSize(j, "out_channels", name);
    const json& k = j.contains("kernel") ? j.at("kernel") : json();
    if (k.is_array() && k.size() == 2 && k[0].is_number_integer() &&
        k[1].is_number_integer()) {
      c.kernel_h = k[0].get<std::size_t>();
      c.kernel_w = k[1].get<std::size_t>();
    } else {
      c.kernel_h = c.kernel_w = JsonSize(j, "kernel", name);
    }
    c.stride = JsonSizeOr(j, "stride", name, 1);
    c.pad = JsonSizeOr(j, "pad", name, 0);
    c.has_bias = JsonBoolOr(j, "bias", true);
    return {name, c};
  }
  if (type == "fully_connected") {
    return {name, FullyConnected{JsonSize(j, "out_features", name),
                                 JsonBoolOr(j, "bias", true)}};
  }
  if (type == "relu") return {name, ReLU{}};
  if (type == "maxpool") {
    const std::size_t window = JsonSize(j, "window", name);
    return {name, MaxPool{window, JsonSizeOr(j, "stride", name, window)}};
  }
  throw StructuralError("layer '" + name + "' has unsupported type '" + type +
                        "' (supported: conv2d, fully_connected, relu, "
                        "maxpool)");
}

json LayerToJson(const Layer& layer) {
  json j{{"name", layer.name}, {"type", std::string(kind_name(layer.spec))}};
  if (const auto* c = std::get_if<Conv2D>(&layer.spec)) {
    j["out_channels"] = c->out_channels;
    j["kernel"] = {c->kernel_h, c->kernel_w};
    j["stride"] = c->stride;
    j["pad"] = c->pad;
    j["bias"] = c->has_bias;
  } else if (const auto* f = std::get_if<FullyConnected>(&layer.spec)) {
    j["out_features"] = f->out_features;
    j["bias"] = f->has_bias;
  } else if (const auto* p = std::get_if<MaxPool>(&layer.spec)) {
    j["window"] = p->window;
    j["stride"] = p->stride;
  }
  return j;
}

std::string Hex(std::uint32_t v) {
  std::ostringstream out;
  out << "0x" << std::hex << std::setw(8) << std::setfill('0') << v;
  return out.str();
}

std::string ReadText(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

json ParseJson(const std::filesystem::path& path) {
  const std::string text = ReadText(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  std::vector<std::byte> bytes(raw.size());
  std::transform(raw.begin(), raw.end(), bytes.begin(),
                 [](char c) { return static_cast<std::byte>(c); });
  return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

std::vector<std::byte> encode_weights(std::span<const NamedTensor> tensors) {
  std::vector<std::byte> out;
  for (char c : kWeightsMagic) out.push_back(static_cast<std::byte>(c));
  PutLittle(out, kWeightsVersion, 4);
  PutLittle(out, tensors.size(), 4);
  for (const NamedTensor& t : tensors) {
    if (t.name.size() > 0xffff) {
      throw ValidationError("tensor name longer than 65535 bytes");
    }
    PutLittle(out, t.name.size(), 2);
    for (char c : t.name) out.push_back(static_cast<std::byte>(c));
    PutLittle(out, kFloat32, 1);
    PutLittle(out, t.tensor.shape().size(), 1);
    for (std::size_t d : t.tensor.shape()) PutLittle(out, d, 4);
    for (float v : t.tensor.values()) {
      PutLittle(out, std::bit_cast<std::uint32_t>(v), 4);
    }
  }
  return out;
}

std::vector<NamedTensor> decode_weights(std::span<const std::byte> bytes) {
  ByteReader r(bytes, "weights container");
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kWeightsMagic.begin(),
                  [](std::byte b, char c) { return b == std::byte(c); })) {
    throw FormatError("weights container: bad magic (expected \"CNNW\")");
  }
  const auto version = r.little(4);
  if (version != kWeightsVersion) {
    throw FormatError("weights container: unsupported version " +
                      std::to_string(version));
  }
  const auto count = r.little(4);
  std::vector<NamedTensor> tensors;
  std::set<std::string> seen;
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto name_len = r.little(2);
    const auto name_bytes = r.take(name_len);
    std::string name(reinterpret_cast<const char*>(name_bytes.data()),
                     name_bytes.size());
    if (!seen.insert(name).second) {
      throw FormatError("weights container: duplicate tensor '" + name + "'");
    }
    const auto dtype = r.little(1);
    if (dtype != kFloat32) {
      throw FormatError("tensor '" + name + "': unsupported dtype " +
                        std::to_string(dtype));
    }
    const auto rank = r.little(1);
    Shape shape;
    std::uint64_t elements = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<std::size_t>(r.little(4)));
      elements *= shape.back();
      if (elements * 4 > bytes.size()) {
        throw FormatError("tensor '" + name + "': payload of shape " +
                          to_string(shape) + " exceeds the file");
      }
    }
    if (elements * 4 > r.remaining()) {
      throw FormatError("tensor '" + name + "': truncated payload (need " +
                        std::to_string(elements * 4) + " bytes, have " +
                        std::to_string(r.remaining()) + ")");
    }
    std::vector<float> values(elements);
    for (float& v : values) {
      v = std::bit_cast<float>(static_cast<std::uint32_t>(r.little(4)));
      if (!std::isfinite(v)) {
        throw FormatError("tensor '" + name + "': non-finite value");
      }
    }
    tensors.push_back({std::move(name), Tensor(shape, std::move(values))});
  }
  if (r.remaining() != 0) {
    throw FormatError("weights container: " + std::to_string(r.remaining()) +
                      " trailing bytes after last entry");
  }
  return tensors;
}

void write_weights(const std::filesystem::path& path,
                   std::span<const NamedTensor> tensors) {
  const auto bytes = encode_weights(tensors);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                    bytes.size()));
}

std::vector<NamedTensor> read_weights(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_weights(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

ModelDescriptor parse_descriptor(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model descriptor: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("model descriptor must be an object");
  ModelDescriptor d;
  d.name = j.value("name", std::string("model"));
  if (!j.contains("input_shape") || !j.at("input_shape").is_array()) {
    throw StructuralError("model descriptor needs an 'input_shape' array");
  }
  for (const json& dim : j.at("input_shape")) {
    if (!dim.is_number_integer() || dim.get<long long>() <= 0) {
      throw StructuralError("input_shape dimensions must be positive integers");
    }
    d.input_shape.push_back(dim.get<std::size_t>());
  }
  if (!j.contains("layers") || !j.at("layers").is_array() ||
      j.at("layers").empty()) {
    throw StructuralError("model descriptor needs a nonempty 'layers' list");
  }
  for (std::size_t i = 0; i < j.at("layers").size(); ++i) {
    d.layers.push_back(ParseLayer(j.at("layers")[i], i));
  }
  return d;
}

std::string format_descriptor(const ModelDescriptor& descriptor) {
  json layers = json::array();
  for (const Layer& l : descriptor.layers) layers.push_back(LayerToJson(l));
  json j{{"name", descriptor.name},
         {"input_shape", descriptor.input_shape},
         {"layers", layers}};
  return j.dump(2) + "\n";
}

NetworkGraph assemble_network(const ModelDescriptor& descriptor,
                              std::vector<NamedTensor> tensors) {
  std::map<std::string, NamedTensor*> by_name;
  for (NamedTensor& t : tensors) by_name[t.name] = &t;

  std::map<std::string, LayerParams> params;
  std::set<std::string> used;
  for (const Layer& layer : descriptor.layers) {
    if (!is_weight_bearing(layer.spec)) continue;
    const std::string weight_name = layer.name + ".weight";
    const std::string bias_name = layer.name + ".bias";
    auto w = by_name.find(weight_name);
    if (w == by_name.end()) {
      throw StructuralError("layer '" + layer.name + "': weights file has no '" +
                            weight_name + "'");
    }
    LayerParams p{std::move(w->second->tensor), std::nullopt};
    used.insert(weight_name);
    if (auto b = by_name.find(bias_name); b != by_name.end()) {
      p.bias = std::move(b->second->tensor);
      used.insert(bias_name);
    }
    params.emplace(layer.name, std::move(p));
  }
  for (const auto& [name, t] : by_name) {
    if (!used.count(name)) {
      throw StructuralError("weights file entry '" + name +
                            "' matches no conv/fc layer in the descriptor");
    }
  }
  return NetworkGraph(descriptor.input_shape, descriptor.layers,
                      std::move(params));
}

NetworkGraph load_model(const std::filesystem::path& descriptor_path,
                        const std::filesystem::path& weights_path) {
  ModelDescriptor descriptor;
  try {
    descriptor = parse_descriptor(ReadText(descriptor_path));
  } catch (const FormatError& e) {
    throw FormatError(descriptor_path.string() + ": " + e.what());
  }
  return assemble_network(descriptor, read_weights(weights_path));
}

void save_model(const NetworkGraph& net, std::string_view name,
                const std::filesystem::path& descriptor_path,
                const std::filesystem::path& weights_path) {
  ModelDescriptor d{std::string(name), net.input_shape(), net.layers()};
  write_file(descriptor_path, format_descriptor(d));
  std::vector<NamedTensor> tensors;
  for (std::size_t i : net.weight_bearing()) {
    const std::string& layer = net.layers()[i].name;
    const LayerParams& p = net.params(layer);
    tensors.push_back({layer + ".weight", p.weight});
    if (p.bias) tensors.push_back({layer + ".bias", *p.bias});
  }
  write_weights(weights_path, tensors);
}

Dataset load_mnist(const std::filesystem::path& images_path,
                   const std::filesystem::path& labels_path) {
  const auto image_bytes = read_file(images_path);
  const auto label_bytes = read_file(labels_path);

  ByteReader images(image_bytes, images_path.string());
  if (const auto magic = images.big_u32(); magic != kIdxImagesMagic) {
    throw FormatError(images_path.string() + ": bad IDX image magic " + Hex(magic) +
                      " (expected 0x00000803)");
  }
  const std::uint64_t count = images.big_u32();
  const std::uint64_t rows = images.big_u32();
  const std::uint64_t cols = images.big_u32();
  if (images.remaining() != count * rows * cols) {
    throw FormatError(images_path.string() + ": header promises " +
                      std::to_string(count) + " images of " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      " but payload is " + std::to_string(images.remaining()) +
                      " bytes");
  }

  ByteReader labels(label_bytes, labels_path.string());
  if (const auto magic = labels.big_u32(); magic != kIdxLabelsMagic) {
    throw FormatError(labels_path.string() + ": bad IDX label magic " + Hex(magic) +
                      " (expected 0x00000801)");
  }
  const std::uint64_t label_count = labels.big_u32();
  if (label_count != count || labels.remaining() != label_count) {
    throw FormatError(labels_path.string() + ": " + std::to_string(label_count) +
                      " labels (payload " + std::to_string(labels.remaining()) +
                      " bytes) for " + std::to_string(count) + " images");
  }

  Dataset data;
  data.reserve(count);
  const Shape shape{1, static_cast<std::size_t>(rows),
                    static_cast<std::size_t>(cols)};
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<float> pixels;
    pixels.reserve(rows * cols);
    for (std::byte b : images.take(rows * cols)) {
      pixels.push_back(static_cast<float>(std::to_integer<std::uint8_t>(b)) /
                       255.0f);
    }
    const auto label = std::to_integer<int>(labels.take(1)[0]);
    if (label > 9) {
      throw FormatError(labels_path.string() + ": label " +
                        std::to_string(label) + " at index " +
                        std::to_string(i) + " outside 0-9");
    }
    data.push_back({Tensor(shape, std::move(pixels)), label});
  }
  return data;
}

void write_profile(const std::filesystem::path& path,
                   const CalibrationProfile& profile, const ScaleSet& scales) {
  if (scales.layers.size() != profile.layers.size()) {
    throw ValidationError("scale set and profile cover different layers");
  }
  json layers = json::array();
  for (std::size_t i = 0; i < profile.layers.size(); ++i) {
    const LayerRange& r = profile.layers[i];
    const LayerScales& s = scales.layers[i];
    if (r.layer != s.layer) {
      throw ValidationError("scale set and profile disagree on layer order");
    }
    layers.push_back({{"layer", r.layer},
                      {"input_max_abs", r.input_max_abs},
                      {"weight_max_abs", r.weight_max_abs},
                      {"input_scale_exponent", s.input_exponent},
                      {"weight_scale_exponent", s.weight_exponent}});
  }
  json j{{"schema_version", 1},
         {"kind", "calibration_profile"},
         {"samples", profile.samples},
         {"global_max_abs", profile.global_max_abs},
         {"policy", std::string(to_string(scales.policy))},
         {"layers", layers}};
  write_file(path, j.dump(2) + "\n");
}

StoredProfile read_profile(const std::filesystem::path& path) {
  const json j = ParseJson(path);
  try {
    if (j.at("kind").get<std::string>() != "calibration_profile" ||
        j.at("schema_version").get<int>() != 1) {
      throw FormatError(path.string() + ": not a version-1 calibration profile");
    }
    StoredProfile stored;
    stored.profile.samples = j.at("samples").get<std::size_t>();
    stored.profile.global_max_abs = j.at("global_max_abs").get<double>();
    stored.scales.policy = parse_scale_policy(j.at("policy").get<std::string>());
    for (const json& l : j.at("layers")) {
      const auto name = l.at("layer").get<std::string>();
      stored.profile.layers.push_back({name, l.at("input_max_abs").get<double>(),
                                       l.at("weight_max_abs").get<double>()});
      stored.scales.layers.push_back({name,
                                      l.at("input_scale_exponent").get<int>(),
                                      l.at("weight_scale_exponent").get<int>()});
    }
    return stored;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace qnet
