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

#include "qnet/inference.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>

#include "qnet/error.h"

namespace qnet {
namespace {

struct Range {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

// Output positions o in [0, out_size) whose source index o*stride + tap - pad
// falls inside [0, in_size).
Range ValidOutputs(std::size_t tap, std::size_t pad, std::size_t stride,
                   std::size_t in_size, std::size_t out_size) {
  const long t = static_cast<long>(tap);
  const long p = static_cast<long>(pad);
  const long s = static_cast<long>(stride);
  const long n = static_cast<long>(in_size);
  long lo = t >= p ? 0 : (p - t + s - 1) / s;
  long hi = n + p - t <= 0 ? 0 : (n + p - t - 1) / s + 1;
  hi = std::min(hi, static_cast<long>(out_size));
  lo = std::min(lo, hi);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

void ConvForward(const Conv2D& c, const Shape& in_shape,
                 std::span<const float> in, const Tensor& weight,
                 const std::optional<Tensor>& bias, const Shape& out_shape,
                 std::span<float> out) {
  const std::size_t channels = in_shape[0], height = in_shape[1],
                    width = in_shape[2];
  const std::size_t out_h = out_shape[1], out_w = out_shape[2];
  std::vector<double> acc(out_h * out_w);
  const auto w = weight.values();
  for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
    std::fill(acc.begin(), acc.end(), bias ? (*bias)[oc] : 0.0);
    for (std::size_t ic = 0; ic < channels; ++ic) {
      for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
        const Range rows = ValidOutputs(ky, c.pad, c.stride, height, out_h);
        for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
          const double tap =
              w[((oc * channels + ic) * c.kernel_h + ky) * c.kernel_w + kx];
          if (tap == 0.0) continue;
          const Range cols = ValidOutputs(kx, c.pad, c.stride, width, out_w);
          for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
            const float* src =
                in.data() + (ic * height + oy * c.stride + ky - c.pad) * width +
                kx - c.pad;
            double* dst = acc.data() + oy * out_w;
            for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
              dst[ox] += tap * src[ox * c.stride];
            }
          }
        }
      }
    }
    float* o = out.data() + oc * out_h * out_w;
    for (std::size_t i = 0; i < acc.size(); ++i) o[i] = static_cast<float>(acc[i]);
  }
}

void FullyConnectedForward(const FullyConnected& f, std::span<const float> in,
                           const Tensor& weight,
                           const std::optional<Tensor>& bias,
                           std::span<float> out) {
  const std::size_t n = in.size();
  const auto w = weight.values();
  for (std::size_t o = 0; o < f.out_features; ++o) {
    double acc = bias ? (*bias)[o] : 0.0;
    const float* row = w.data() + o * n;
    for (std::size_t i = 0; i < n; ++i) {
      acc += static_cast<double>(row[i]) * in[i];
    }
    out[o] = static_cast<float>(acc);
  }
}

void MaxPoolForward(const MaxPool& p, const Shape& in_shape,
                    std::span<const float> in, const Shape& out_shape,
                    std::span<float> out) {
  const std::size_t height = in_shape[1], width = in_shape[2];
  const std::size_t out_h = out_shape[1], out_w = out_shape[2];
  for (std::size_t c = 0; c < in_shape[0]; ++c) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        float best = in[(c * height + oy * p.stride) * width + ox * p.stride];
        for (std::size_t ky = 0; ky < p.window; ++ky) {
          for (std::size_t kx = 0; kx < p.window; ++kx) {
            best = std::max(best, in[(c * height + oy * p.stride + ky) * width +
                                     ox * p.stride + kx]);
          }
        }
        out[(c * out_h + oy) * out_w + ox] = best;
      }
    }
  }
}

// Nonzero weights per (in_channel, tap) for conv, per input column for FC.
template <class T>
std::vector<std::uint64_t> NonzeroPerTap(const Shape& weight_shape,
                                         std::span<const T> weight) {
  const std::size_t outputs = weight_shape[0];
  const std::size_t per_output = weight.size() / outputs;
  std::vector<std::uint64_t> counts(per_output, 0);
  for (std::size_t o = 0; o < outputs; ++o) {
    for (std::size_t j = 0; j < per_output; ++j) {
      if (weight[o * per_output + j] != T{0}) ++counts[j];
    }
  }
  return counts;
}

// MACs where both operands are nonzero.
template <class T>
std::uint64_t ExecutedMacs(const LayerSpec& spec, const Shape& in_shape,
                           std::span<const T> in, const Shape& out_shape,
                           std::span<const std::uint64_t> nonzero_per_tap) {
  std::uint64_t executed = 0;
  if (const auto* c = std::get_if<Conv2D>(&spec)) {
    const std::size_t channels = in_shape[0], height = in_shape[1],
                      width = in_shape[2];
    const std::size_t out_h = out_shape[1], out_w = out_shape[2];
    for (std::size_t ic = 0; ic < channels; ++ic) {
      for (std::size_t ky = 0; ky < c->kernel_h; ++ky) {
        const Range rows = ValidOutputs(ky, c->pad, c->stride, height, out_h);
        for (std::size_t kx = 0; kx < c->kernel_w; ++kx) {
          const std::uint64_t weights =
              nonzero_per_tap[(ic * c->kernel_h + ky) * c->kernel_w + kx];
          if (weights == 0) continue;
          const Range cols = ValidOutputs(kx, c->pad, c->stride, width, out_w);
          std::uint64_t live = 0;
          for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
            const T* src = in.data() +
                           (ic * height + oy * c->stride + ky - c->pad) * width +
                           kx - c->pad;
            for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
              if (src[ox * c->stride] != T{0}) ++live;
            }
          }
          executed += weights * live;
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i] != T{0}) executed += nonzero_per_tap[i];
    }
  }
  return executed;
}

template <class Fn>
void ParallelChunks(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::min(resolve_workers(workers), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

const LayerQuant& QuantConfig::at(std::string_view layer) const {
  for (const auto& l : layers) {
    if (l.layer == layer) return l;
  }
  throw ValidationError("quant config has no entry for layer '" +
                        std::string(layer) + "'");
}

LayerQuant& QuantConfig::at(std::string_view layer) {
  return const_cast<LayerQuant&>(std::as_const(*this).at(layer));
}

void validate(const QuantConfig& config, const NetworkGraph& net) {
  if (config.mode == Mode::kFloat) return;
  const auto& wb = net.weight_bearing();
  if (config.layers.size() != wb.size()) {
    throw ValidationError("quant config covers " +
                          std::to_string(config.layers.size()) +
                          " layers, network has " + std::to_string(wb.size()) +
                          " conv/fc layers");
  }
  for (std::size_t i = 0; i < wb.size(); ++i) {
    const std::string& name = net.layers()[wb[i]].name;
    if (config.layers[i].layer != name) {
      throw ValidationError("quant config entry " + std::to_string(i) +
                            " is '" + config.layers[i].layer +
                            "', expected layer '" + name + "'");
    }
  }
}

double LayerTrace::input_zero_fraction() const {
  return input_elements == 0 ? 0.0
                             : static_cast<double>(input_zeros) /
                                   static_cast<double>(input_elements);
}

double LayerTrace::weight_zero_fraction() const {
  return weight_elements == 0 ? 0.0
                              : static_cast<double>(weight_zeros) /
                                    static_cast<double>(weight_elements);
}

void LayerTrace::merge(const LayerTrace& other) {
  if (layer.empty()) layer = other.layer;
  samples += other.samples;
  input_zeros += other.input_zeros;
  input_elements += other.input_elements;
  weight_zeros += other.weight_zeros;
  weight_elements += other.weight_elements;
  total_macs += other.total_macs;
  skipped_macs += other.skipped_macs;
  input_max_abs = std::max(input_max_abs, other.input_max_abs);
  output_max_abs = std::max(output_max_abs, other.output_max_abs);
}

void merge(NetworkTrace& into, const NetworkTrace& from) {
  if (into.empty()) {
    into = from;
    return;
  }
  if (into.size() != from.size()) {
    throw ValidationError("cannot merge traces of different networks");
  }
  for (std::size_t i = 0; i < into.size(); ++i) into[i].merge(from[i]);
}

PreparedNetwork::PreparedNetwork(const NetworkGraph& net, QuantConfig config)
    : net_(&net), config_(std::move(config)) {
  validate(config_, net);
  layers_.resize(net.layers().size());
  for (std::size_t k = 0; k < net.weight_bearing().size(); ++k) {
    const std::size_t i = net.weight_bearing()[k];
    const Layer& layer = net.layers()[i];
    const LayerParams& params = net.params(layer.name);
    Prepared& p = layers_[i];
    if (config_.mode == Mode::kFloat) {
      p.weight = params.weight;
      p.bias = params.bias;
      continue;
    }
    p.quant = &config_.layers[k];
    const QuantizedTensor codes = quantize(params.weight, p.quant->weight);
    p.weight = dequantize(codes);
    p.weight_zeros = static_cast<std::uint64_t>(
        std::count(codes.codes.begin(), codes.codes.end(), 0));
    p.nonzero_per_tap = NonzeroPerTap<std::int32_t>(
        codes.shape, std::span<const std::int32_t>(codes.codes));
    if (params.bias) {
      const QuantSpec bias_spec(p.quant->weight.bits(),
                                next_pow2_exponent(params.bias->max_abs()));
      p.bias = fake_quantize(*params.bias, bias_spec);
    }
  }
}

ForwardResult PreparedNetwork::forward(const Tensor& image) const {
  const NetworkGraph& net = *net_;
  if (image.shape() != net.input_shape()) {
    throw StructuralError("image shape " + to_string(image.shape()) +
                          " does not match network input " +
                          to_string(net.input_shape()));
  }
  const bool quantized = config_.mode == Mode::kQuantized;
  ForwardResult result;
  result.trace.resize(net.layers().size());

  std::vector<float> x(image.values().begin(), image.values().end());
  std::vector<float> y;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const Layer& layer = net.layers()[i];
    const Shape& in_shape = net.layer_input_shape(i);
    const Shape& out_shape = net.output_shapes()[i];
    LayerTrace& tr = result.trace[i];
    tr.layer = layer.name;
    tr.samples = 1;
    for (float v : x) tr.input_max_abs = std::max<double>(tr.input_max_abs, std::fabs(v));

    y.assign(element_count(out_shape), 0.0f);
    if (is_weight_bearing(layer.spec)) {
      const Prepared& p = layers_[i];
      tr.total_macs = layer_macs(layer.spec, in_shape, out_shape);
      if (quantized) {
        const QuantSpec& spec = p.quant->input;
        for (float& v : x) {
          const std::int32_t code = quantize(v, spec);
          if (code == 0) ++tr.input_zeros;
          v = static_cast<float>(dequantize(code, spec));
        }
        tr.input_elements = x.size();
        tr.weight_zeros = p.weight_zeros;
        tr.weight_elements = p.weight.size();
        tr.skipped_macs =
            tr.total_macs - ExecutedMacs<float>(layer.spec, in_shape, x,
                                                out_shape, p.nonzero_per_tap);
      }
      if (const auto* c = std::get_if<Conv2D>(&layer.spec)) {
        ConvForward(*c, in_shape, x, p.weight, p.bias, out_shape, y);
      } else {
        FullyConnectedForward(std::get<FullyConnected>(layer.spec), x,
                              p.weight, p.bias, y);
      }
    } else if (std::holds_alternative<ReLU>(layer.spec)) {
      for (std::size_t j = 0; j < x.size(); ++j) y[j] = std::max(0.0f, x[j]);
    } else {
      MaxPoolForward(std::get<MaxPool>(layer.spec), in_shape, x, out_shape, y);
    }
    for (float v : y) tr.output_max_abs = std::max<double>(tr.output_max_abs, std::fabs(v));
    std::swap(x, y);
  }
  result.logits = Tensor(net.output_shapes().back(), std::move(x));
  return result;
}

ForwardResult forward(const NetworkGraph& net, const Tensor& image,
                      const QuantConfig& config) {
  return PreparedNetwork(net, config).forward(image);
}

SkipCount count_skips(const QuantizedTensor& input,
                      const QuantizedTensor& weight, const LayerSpec& layer) {
  if (!is_weight_bearing(layer)) {
    throw ValidationError("count_skips needs a conv or fully connected layer");
  }
  const std::vector<Layer> single{{"layer", layer}};
  const Shape out_shape = infer_shapes(input.shape, single).front();
  const Shape want = expected_weight_shape(layer, input.shape);
  if (weight.shape != want) {
    throw StructuralError("weight shape " + to_string(weight.shape) +
                          ", expected " + to_string(want));
  }
  if (input.codes.size() != element_count(input.shape) ||
      weight.codes.size() != element_count(weight.shape)) {
    throw ValidationError("code count disagrees with tensor shape");
  }
  const std::span<const std::int32_t> w(weight.codes);
  const auto per_tap = NonzeroPerTap<std::int32_t>(weight.shape, w);
  SkipCount result;
  result.total = layer_macs(layer, input.shape, out_shape);
  result.skipped =
      result.total - ExecutedMacs<std::int32_t>(
                         layer, input.shape,
                         std::span<const std::int32_t>(input.codes), out_shape,
                         per_tap);
  return result;
}

bool in_top_k(std::span<const float> logits, int label, std::size_t k) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw ValidationError("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(logits.size()) + ")");
  }
  const float target = logits[static_cast<std::size_t>(label)];
  std::size_t rank = 0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (logits[j] > target ||
        (logits[j] == target && j < static_cast<std::size_t>(label))) {
      ++rank;
    }
  }
  return rank < k;
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

EvalResult evaluate_accuracy(const PreparedNetwork& prepared,
                             std::span<const Sample> samples,
                             const EvalOptions& options) {
  if (samples.empty()) throw ValidationError("evaluation dataset is empty");
  if (options.top_k == 0) throw ValidationError("top_k must be >= 1");
  const std::size_t count =
      options.sample_limit == 0 ? samples.size()
                                : std::min(options.sample_limit, samples.size());

  const std::size_t workers =
      std::min(resolve_workers(options.workers), count);
  std::vector<std::size_t> correct(workers, 0);
  std::vector<NetworkTrace> traces(workers);
  ParallelChunks(count, workers,
                 [&](std::size_t w, std::size_t begin, std::size_t end) {
                   for (std::size_t i = begin; i < end; ++i) {
                     const ForwardResult r = prepared.forward(samples[i].image);
                     if (in_top_k(r.logits.values(), samples[i].label,
                                  options.top_k)) {
                       ++correct[w];
                     }
                     merge(traces[w], r.trace);
                   }
                 });

  EvalResult result;
  result.evaluated = count;
  for (std::size_t w = 0; w < workers; ++w) {
    result.correct += correct[w];
    merge(result.trace, traces[w]);
  }
  result.accuracy =
      static_cast<double>(result.correct) / static_cast<double>(count);
  return result;
}

EvalResult evaluate_accuracy(const NetworkGraph& net,
                             std::span<const Sample> samples,
                             const QuantConfig& config,
                             const EvalOptions& options) {
  return evaluate_accuracy(PreparedNetwork(net, config), samples, options);
}

}  // namespace qnet
