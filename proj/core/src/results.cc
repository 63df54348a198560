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

#include "qnet/results.h"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qnet/error.h"
#include "qnet/io.h"

namespace qnet {
namespace {

using nlohmann::json;

void CheckFinite(double v, std::string_view field) {
  if (!std::isfinite(v)) {
    throw ValidationError("results field '" + std::string(field) +
                          "' is not finite");
  }
}

json ToJson(const EnergyCoefficients& c) {
  return {{"mul", c.mul},   {"add", c.add},   {"reg", c.reg},
          {"wire", c.wire}, {"sram", c.sram}, {"include_memory", c.include_memory},
          {"n_max", c.n_max}};
}

EnergyCoefficients CoefficientsFromJson(const json& j) {
  EnergyCoefficients c;
  c.mul = j.at("mul").get<double>();
  c.add = j.at("add").get<double>();
  c.reg = j.at("reg").get<double>();
  c.wire = j.at("wire").get<double>();
  c.sram = j.at("sram").get<double>();
  c.include_memory = j.at("include_memory").get<bool>();
  c.n_max = j.at("n_max").get<int>();
  return c;
}

json ToJson(const RunMetadata& m) {
  return {{"command", m.command},
          {"network", m.network},
          {"dataset", m.dataset},
          {"normalization", m.normalization},
          {"scaling_policy", m.scaling_policy},
          {"calibration_data", m.calibration_data},
          {"calibration_samples", m.calibration_samples},
          {"eval_samples", m.eval_samples},
          {"full_eval_samples", m.full_eval_samples},
          {"top_k", m.top_k},
          {"seed", m.seed},
          {"skipping", m.skipping},
          {"quantize_network_input", m.quantize_network_input},
          {"coefficients", ToJson(m.coefficients)}};
}

RunMetadata MetadataFromJson(const json& j) {
  RunMetadata m;
  m.command = j.at("command").get<std::string>();
  m.network = j.at("network").get<std::string>();
  m.dataset = j.at("dataset").get<std::string>();
  m.normalization = j.at("normalization").get<std::string>();
  m.scaling_policy = j.at("scaling_policy").get<std::string>();
  m.calibration_data = j.at("calibration_data").get<std::string>();
  m.calibration_samples = j.at("calibration_samples").get<std::size_t>();
  m.eval_samples = j.at("eval_samples").get<std::size_t>();
  m.full_eval_samples = j.at("full_eval_samples").get<std::size_t>();
  m.top_k = j.at("top_k").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.skipping = j.at("skipping").get<std::string>();
  m.quantize_network_input = j.at("quantize_network_input").get<bool>();
  m.coefficients = CoefficientsFromJson(j.at("coefficients"));
  return m;
}

json ToJson(const PointLayerRow& r) {
  for (double v : {r.zero_frac_in, r.zero_frac_w, r.energy, r.baseline_energy}) {
    CheckFinite(v, r.layer);
  }
  return {{"layer", r.layer},
          {"input_bits", r.input_bits},
          {"weight_bits", r.weight_bits},
          {"input_scale_exponent", r.input_scale_exponent},
          {"weight_scale_exponent", r.weight_scale_exponent},
          {"zero_frac_in", r.zero_frac_in},
          {"zero_frac_w", r.zero_frac_w},
          {"total_macs", r.total_macs},
          {"skipped_macs", r.skipped_macs},
          {"energy", r.energy},
          {"baseline_energy", r.baseline_energy}};
}

PointLayerRow RowFromJson(const json& j) {
  PointLayerRow r;
  r.layer = j.at("layer").get<std::string>();
  r.input_bits = j.at("input_bits").get<int>();
  r.weight_bits = j.at("weight_bits").get<int>();
  r.input_scale_exponent = j.at("input_scale_exponent").get<int>();
  r.weight_scale_exponent = j.at("weight_scale_exponent").get<int>();
  r.zero_frac_in = j.at("zero_frac_in").get<double>();
  r.zero_frac_w = j.at("zero_frac_w").get<double>();
  r.total_macs = j.at("total_macs").get<std::uint64_t>();
  r.skipped_macs = j.at("skipped_macs").get<std::uint64_t>();
  r.energy = j.at("energy").get<double>();
  r.baseline_energy = j.at("baseline_energy").get<double>();
  return r;
}

void PutOptional(json& j, const char* key, const std::optional<double>& v) {
  if (v) {
    CheckFinite(*v, key);
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

std::optional<double> GetOptional(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

json ToJson(const PointRecord& p) {
  const std::pair<double, const char*> numbers[] = {
      {p.target, "target"},
      {p.accuracy, "accuracy"},
      {p.reference_accuracy, "reference_accuracy"},
      {p.relative_accuracy, "relative_accuracy"},
      {p.rel_energy, "rel_energy"},
      {p.rel_energy_skip, "rel_energy_skip"},
      {p.rel_energy_no_skip, "rel_energy_no_skip"},
      {p.mean_zero_frac_in, "mean_zero_frac_in"},
      {p.mean_zero_frac_w, "mean_zero_frac_w"}};
  for (const auto& [v, name] : numbers) CheckFinite(v, name);
  json layers = json::array();
  for (const auto& r : p.layers) layers.push_back(ToJson(r));
  json j{{"id", p.id},
         {"policy", p.policy},
         {"target", p.target},
         {"label", p.label},
         {"accuracy", p.accuracy},
         {"reference_accuracy", p.reference_accuracy},
         {"relative_accuracy", p.relative_accuracy},
         {"samples", p.samples},
         {"full_samples", p.full_samples},
         {"rel_energy", p.rel_energy},
         {"rel_energy_skip", p.rel_energy_skip},
         {"rel_energy_no_skip", p.rel_energy_no_skip},
         {"mean_zero_frac_in", p.mean_zero_frac_in},
         {"mean_zero_frac_w", p.mean_zero_frac_w},
         {"layers", layers}};
  PutOptional(j, "full_accuracy", p.full_accuracy);
  PutOptional(j, "full_reference_accuracy", p.full_reference_accuracy);
  PutOptional(j, "full_relative_accuracy", p.full_relative_accuracy);
  return j;
}

PointRecord PointFromJson(const json& j) {
  PointRecord p;
  p.id = j.at("id").get<int>();
  p.policy = j.at("policy").get<std::string>();
  p.target = j.at("target").get<double>();
  p.label = j.at("label").get<std::string>();
  p.accuracy = j.at("accuracy").get<double>();
  p.reference_accuracy = j.at("reference_accuracy").get<double>();
  p.relative_accuracy = j.at("relative_accuracy").get<double>();
  p.samples = j.at("samples").get<std::size_t>();
  p.full_samples = j.at("full_samples").get<std::size_t>();
  p.full_accuracy = GetOptional(j, "full_accuracy");
  p.full_reference_accuracy = GetOptional(j, "full_reference_accuracy");
  p.full_relative_accuracy = GetOptional(j, "full_relative_accuracy");
  p.rel_energy = j.at("rel_energy").get<double>();
  p.rel_energy_skip = j.at("rel_energy_skip").get<double>();
  p.rel_energy_no_skip = j.at("rel_energy_no_skip").get<double>();
  p.mean_zero_frac_in = j.at("mean_zero_frac_in").get<double>();
  p.mean_zero_frac_w = j.at("mean_zero_frac_w").get<double>();
  for (const json& r : j.at("layers")) p.layers.push_back(RowFromJson(r));
  return p;
}

// Shortest text that parses back to the same double.
std::string FormatDouble(double v) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  double back = 0.0;
  for (int digits = 1; digits <= std::numeric_limits<double>::max_digits10;
       ++digits) {
    std::ostringstream trial;
    trial << std::setprecision(digits) << v;
    std::istringstream(trial.str()) >> back;
    if (back == v) return trial.str();
  }
  return out.str();
}

}  // namespace

PointRecord make_point_record(int id, std::string policy, double target,
                              std::string label, const OperatingPoint& point,
                              const NetworkGraph& net,
                              const EnergyCoefficients& coeffs,
                              Skipping skipping) {
  const EnergyReport on =
      network_energy(net, point.trace, point.config, coeffs, Skipping::kOn);
  const EnergyReport off =
      network_energy(net, point.trace, point.config, coeffs, Skipping::kOff);
  const EnergyReport& chosen = skipping == Skipping::kOn ? on : off;

  PointRecord p;
  p.id = id;
  p.policy = std::move(policy);
  p.target = target;
  p.label = std::move(label);
  p.accuracy = point.accuracy;
  p.reference_accuracy = point.reference_accuracy;
  p.relative_accuracy = point.relative_accuracy;
  p.samples = point.samples;
  p.rel_energy = chosen.relative_energy;
  p.rel_energy_skip = on.relative_energy;
  p.rel_energy_no_skip = off.relative_energy;
  p.mean_zero_frac_in = point.mean_input_zero_fraction();
  p.mean_zero_frac_w = point.mean_weight_zero_fraction();
  for (std::size_t k = 0; k < net.weight_bearing().size(); ++k) {
    const LayerTrace& t = point.trace[net.weight_bearing()[k]];
    const LayerQuant& q = point.config.layers[k];
    const LayerEnergy& e = chosen.layers[k];
    p.layers.push_back({q.layer, q.input.bits(), q.weight.bits(),
                        q.input.scale_exponent(), q.weight.scale_exponent(),
                        t.input_zero_fraction(), t.weight_zero_fraction(),
                        e.total_macs, e.skipped_macs, e.energy,
                        e.baseline_energy});
  }
  return p;
}

ResultsFormat parse_results_format(std::string_view text) {
  if (text == "structured" || text == "json") return ResultsFormat::kStructured;
  if (text == "csv") return ResultsFormat::kCsv;
  throw ValidationError("format must be 'csv' or 'structured', got '" +
                        std::string(text) + "'");
}

std::string to_structured(const ResultsDocument& doc) {
  json points = json::array();
  for (const auto& p : doc.points) points.push_back(ToJson(p));
  json cases = json::array();
  for (const auto& c : doc.cases) {
    CheckFinite(c.relative_energy, "case relative_energy");
    CheckFinite(c.relative_accuracy, "case relative_accuracy");
    cases.push_back({{"label", c.label},
                     {"description", c.description},
                     {"point_id", c.point_id},
                     {"relative_energy", c.relative_energy},
                     {"relative_accuracy", c.relative_accuracy}});
  }
  json j{{"schema_version", doc.schema_version},
         {"meta", ToJson(doc.meta)},
         {"points", points},
         {"cases", cases}};
  return j.dump(2) + "\n";
}

ResultsDocument parse_structured(std::string_view text) {
  try {
    const json j = json::parse(text);
    ResultsDocument doc;
    doc.schema_version = j.at("schema_version").get<int>();
    if (doc.schema_version != kResultsSchemaVersion) {
      throw FormatError("results: unsupported schema version " +
                        std::to_string(doc.schema_version));
    }
    doc.meta = MetadataFromJson(j.at("meta"));
    for (const json& p : j.at("points")) doc.points.push_back(PointFromJson(p));
    for (const json& c : j.at("cases")) {
      doc.cases.push_back({c.at("label").get<std::string>(),
                           c.at("description").get<std::string>(),
                           c.at("point_id").get<int>(),
                           c.at("relative_energy").get<double>(),
                           c.at("relative_accuracy").get<double>()});
    }
    return doc;
  } catch (const json::exception& e) {
    throw FormatError(std::string("results: ") + e.what());
  }
}

std::string to_csv(const ResultsDocument& doc) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const PointRecord& p : doc.points) {
    for (const PointLayerRow& r : p.layers) {
      out << p.id << ',' << p.policy << ',' << FormatDouble(p.target) << ','
          << r.layer << ',' << r.input_bits << ',' << r.weight_bits << ','
          << FormatDouble(p.relative_accuracy) << ','
          << FormatDouble(p.rel_energy) << ',' << FormatDouble(r.zero_frac_in)
          << ',' << FormatDouble(r.zero_frac_w) << '\n';
    }
  }
  return out.str();
}

void write_results(const ResultsDocument& doc,
                   const std::filesystem::path& path, ResultsFormat format) {
  write_file(path, format == ResultsFormat::kCsv ? to_csv(doc)
                                                 : to_structured(doc));
}

ResultsDocument read_results(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_structured(
        std::string_view(reinterpret_cast<const char*>(bytes.data()),
                         bytes.size()));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace qnet
