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

#ifndef QNET_RESULTS_H_
#define QNET_RESULTS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/energy.h"
#include "qnet/operating_point.h"

namespace qnet {

inline constexpr int kResultsSchemaVersion = 1;

struct RunMetadata {
  std::string command;
  std::string network;
  std::string dataset;
  std::string normalization = "pixel/255 in [0,1], no mean subtraction";
  std::string scaling_policy;
  std::string calibration_data;
  std::size_t calibration_samples = 0;
  std::size_t eval_samples = 0;
  std::size_t full_eval_samples = 0;
  std::size_t top_k = 1;
  std::uint64_t seed = 0;
  std::string skipping = "on";
  // Activations entering the first layer are quantized like any other input.
  bool quantize_network_input = true;
  EnergyCoefficients coefficients;

  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct PointLayerRow {
  std::string layer;
  int input_bits = 0;
  int weight_bits = 0;
  int input_scale_exponent = 0;
  int weight_scale_exponent = 0;
  double zero_frac_in = 0.0;
  double zero_frac_w = 0.0;
  std::uint64_t total_macs = 0;
  std::uint64_t skipped_macs = 0;
  double energy = 0.0;
  double baseline_energy = 0.0;

  friend bool operator==(const PointLayerRow&, const PointLayerRow&) = default;
};

struct PointRecord {
  int id = 0;
  // "uniform" for sweep points, "per-layer" for greedy points.
  std::string policy;
  // Accuracy target the point was searched for; 0 when none applies.
  double target = 0.0;
  std::string label;
  double accuracy = 0.0;
  double reference_accuracy = 0.0;
  double relative_accuracy = 0.0;
  std::size_t samples = 0;
  // Re-evaluation on the full validation set, when performed.
  std::optional<double> full_accuracy;
  std::optional<double> full_reference_accuracy;
  std::optional<double> full_relative_accuracy;
  std::size_t full_samples = 0;
  // Under the run's skip mode.
  double rel_energy = 0.0;
  double rel_energy_skip = 0.0;
  double rel_energy_no_skip = 0.0;
  double mean_zero_frac_in = 0.0;
  double mean_zero_frac_w = 0.0;
  std::vector<PointLayerRow> layers;

  friend bool operator==(const PointRecord&, const PointRecord&) = default;
};

struct CaseRecord {
  std::string label;
  std::string description;
  int point_id = 0;
  double relative_energy = 0.0;
  double relative_accuracy = 0.0;

  friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

struct ResultsDocument {
  int schema_version = kResultsSchemaVersion;
  RunMetadata meta;
  std::vector<PointRecord> points;
  std::vector<CaseRecord> cases;

  friend bool operator==(const ResultsDocument&,
                         const ResultsDocument&) = default;
};

// Energy is computed both with and without skipping; `skipping` picks which
// one fills rel_energy and the per-layer energy columns.
PointRecord make_point_record(int id, std::string policy, double target,
                              std::string label, const OperatingPoint& point,
                              const NetworkGraph& net,
                              const EnergyCoefficients& coeffs,
                              Skipping skipping);

enum class ResultsFormat { kStructured, kCsv };
ResultsFormat parse_results_format(std::string_view text);

inline constexpr std::string_view kCsvHeader =
    "point_id,policy,target,layer,input_bits,weight_bits,rel_accuracy,"
    "rel_energy,zero_frac_in,zero_frac_w";

// Throws ValidationError when a numeric field is not finite.
std::string to_structured(const ResultsDocument& doc);
ResultsDocument parse_structured(std::string_view text);
// One row per (point, layer).
std::string to_csv(const ResultsDocument& doc);

void write_results(const ResultsDocument& doc,
                   const std::filesystem::path& path, ResultsFormat format);
ResultsDocument read_results(const std::filesystem::path& path);

}  // namespace qnet

#endif  // QNET_RESULTS_H_
