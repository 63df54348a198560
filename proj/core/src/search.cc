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

#include "qnet/search.h"

#include <cmath>
#include <utility>

#include "qnet/error.h"

namespace qnet {
namespace {

double MeanOverLayers(const NetworkTrace& trace,
                      double (LayerTrace::*fraction)() const) {
  double sum = 0.0;
  std::size_t layers = 0;
  for (const LayerTrace& t : trace) {
    if (t.total_macs == 0) continue;
    sum += (t.*fraction)();
    ++layers;
  }
  return layers == 0 ? 0.0 : sum / static_cast<double>(layers);
}

}  // namespace

double OperatingPoint::mean_input_zero_fraction() const {
  return MeanOverLayers(trace, &LayerTrace::input_zero_fraction);
}

double OperatingPoint::mean_weight_zero_fraction() const {
  return MeanOverLayers(trace, &LayerTrace::weight_zero_fraction);
}

void validate(const SearchSettings& settings) {
  if (!(settings.target > 0.0) || !std::isfinite(settings.target)) {
    throw ValidationError("target relative accuracy must be positive");
  }
  if (settings.min_bits < kMinBits || settings.max_bits > kMaxBits ||
      settings.min_bits > settings.max_bits) {
    throw ValidationError("bit range [" + std::to_string(settings.min_bits) +
                          ", " + std::to_string(settings.max_bits) +
                          "] must lie within [1, 16]");
  }
  if (settings.top_k == 0) throw ValidationError("top_k must be >= 1");
}

AccuracyEvaluator::AccuracyEvaluator(const NetworkGraph& net,
                                     std::span<const Sample> samples,
                                     EvalOptions options)
    : net_(&net), samples_(samples), options_(options) {
  const EvalResult reference =
      evaluate_accuracy(net, samples, QuantConfig::Float(), options_);
  samples_count_ = reference.evaluated;
  reference_accuracy_ = reference.accuracy;
}

OperatingPoint AccuracyEvaluator::evaluate(const QuantConfig& config) {
  EvalResult r = evaluate_accuracy(*net_, samples_, config, options_);
  ++evaluations_;
  OperatingPoint point;
  point.config = config;
  point.accuracy = r.accuracy;
  point.reference_accuracy = reference_accuracy_;
  point.relative_accuracy =
      reference_accuracy_ > 0.0 ? r.accuracy / reference_accuracy_ : 0.0;
  point.samples = r.evaluated;
  point.trace = std::move(r.trace);
  return point;
}

std::vector<OperatingPoint> uniform_sweep(const NetworkGraph& net,
                                          std::span<const Sample> samples,
                                          const ScaleSet& scales,
                                          const SearchSettings& settings) {
  validate(settings);
  AccuracyEvaluator evaluator(
      net, samples,
      EvalOptions{settings.top_k, settings.sample_limit, settings.workers});
  std::vector<OperatingPoint> points;
  for (int bits = settings.max_bits; bits >= settings.min_bits; --bits) {
    points.push_back(evaluator.evaluate(uniform_config(scales, bits)));
  }
  return points;
}

std::string_view to_string(Knob knob) {
  return knob == Knob::kInput ? "input" : "weight";
}

GreedyResult greedy_search(const NetworkGraph& net,
                           std::span<const Sample> samples,
                           const ScaleSet& scales,
                           const SearchSettings& settings,
                           const SearchObserver& observer) {
  validate(settings);
  AccuracyEvaluator evaluator(
      net, samples,
      EvalOptions{settings.top_k, settings.sample_limit, settings.workers});
  if (!(evaluator.reference_accuracy() > 0.0)) {
    throw ValidationError(
        "float accuracy is zero on the search samples; relative accuracy is "
        "undefined");
  }

  QuantConfig config = uniform_config(scales, settings.max_bits);
  GreedyResult result;
  result.point = evaluator.evaluate(config);
  if (!meets_target(result.point.relative_accuracy, settings.target)) {
    result.feasible = false;
    return result;
  }
  result.feasible = true;
  const std::size_t before = evaluator.evaluations();

  for (LayerQuant& layer : config.layers) {
    for (Knob knob : {Knob::kInput, Knob::kWeight}) {
      QuantSpec& spec = knob == Knob::kInput ? layer.input : layer.weight;
      for (int bits = spec.bits() - 1; bits >= settings.min_bits; --bits) {
        const QuantSpec accepted = spec;
        spec = spec.with_bits(bits);
        OperatingPoint candidate = evaluator.evaluate(config);
        const bool ok =
            meets_target(candidate.relative_accuracy, settings.target);
        if (observer) {
          observer({layer.layer, knob, bits, candidate.relative_accuracy, ok});
        }
        if (!ok) {
          spec = accepted;
          break;
        }
        result.point = std::move(candidate);
      }
    }
  }
  result.candidate_evaluations = evaluator.evaluations() - before;
  return result;
}

}  // namespace qnet
