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

#include "cli.h"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "qnet/calibrator.h"
#include "qnet/cases.h"
#include "qnet/energy.h"
#include "qnet/error.h"
#include "qnet/inference.h"
#include "qnet/io.h"
#include "qnet/results.h"
#include "qnet/search.h"

namespace qnet::cli {
namespace {

namespace fs = std::filesystem;

// Every knob of a run. Values come from defaults, then the --config file,
// then explicit flags.
struct RunConfig {
  std::string model;
  std::string weights;
  std::string mnist_images;
  std::string mnist_labels;
  std::string calib_images;
  std::string calib_labels;
  std::string profile;
  std::string input;
  std::string out;
  std::string log;
  std::string policy = "per-layer";
  std::string skip = "on";
  std::string memory_model = "off";
  std::string format = "structured";
  double target = 0.99;
  int bits_min = kMinBits;
  int bits_max = kMaxBits;
  int bits = 8;
  std::size_t samples = 1000;
  std::size_t calib_samples = 1000;
  std::size_t full_samples = 0;
  std::size_t top_k = 1;
  std::size_t workers = 0;
  double coeff_mul = 1.0;
  double coeff_add = 1.0;
  double coeff_reg = 0.0;
  double coeff_wire = 0.0;
  double coeff_sram = 0.0;
  std::uint64_t seed = 1;
};

void AddOptions(CLI::App& app, RunConfig& c) {
  // Later flags win, so scripts can append overrides.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "TOML run configuration (flags override it)");
  app.add_option("--model", c.model, "Model descriptor (JSON)");
  app.add_option("--weights", c.weights, "CNNW weight container");
  app.add_option("--mnist-images", c.mnist_images, "Evaluation images (IDX)");
  app.add_option("--mnist-labels", c.mnist_labels, "Evaluation labels (IDX)");
  app.add_option("--calib-images", c.calib_images,
                 "Calibration images (IDX); defaults to --mnist-images");
  app.add_option("--calib-labels", c.calib_labels,
                 "Calibration labels (IDX); defaults to --mnist-labels");
  app.add_option("--profile", c.profile,
                 "Calibration profile to reuse; calibrates inline if absent");
  app.add_option("--in", c.input, "Results document to re-emit (report)");
  app.add_option("--out", c.out, "Output path");
  app.add_option("--log", c.log, "Search progress log (JSON lines)");
  app.add_option("--policy", c.policy, "Scaling policy")
      ->check(CLI::IsMember({"uniform", "per-layer"}));
  app.add_option("--target", c.target, "Target relative accuracy");
  app.add_option("--bits-min", c.bits_min)->check(CLI::Range(1, 16));
  app.add_option("--bits-max", c.bits_max)->check(CLI::Range(1, 16));
  app.add_option("--bits", c.bits, "Uniform width for the energy command")
      ->check(CLI::Range(1, 16));
  app.add_option("--samples", c.samples,
                 "Evaluation subset size inside sweeps and searches (0 = all)");
  app.add_option("--calib-samples", c.calib_samples,
                 "Calibration subset size (0 = all)");
  app.add_option("--full-samples", c.full_samples,
                 "Final re-evaluation subset size (0 = all)");
  app.add_option("--top-k", c.top_k)->check(CLI::PositiveNumber);
  app.add_option("--skip", c.skip, "Computation skipping")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--coeff-mul", c.coeff_mul)->check(CLI::NonNegativeNumber);
  app.add_option("--coeff-add", c.coeff_add)->check(CLI::NonNegativeNumber);
  app.add_option("--coeff-reg", c.coeff_reg)->check(CLI::NonNegativeNumber);
  app.add_option("--coeff-wire", c.coeff_wire)->check(CLI::NonNegativeNumber);
  app.add_option("--coeff-sram", c.coeff_sram)->check(CLI::NonNegativeNumber);
  app.add_option("--memory-model", c.memory_model)
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--seed", c.seed, "Seed for subset selection");
  app.add_option("--format", c.format)
      ->check(CLI::IsMember({"csv", "structured"}));
  app.add_option("--workers", c.workers,
                 "Evaluation threads (0 = hardware concurrency)");
}

const std::string& Require(const std::string& value, std::string_view flag) {
  if (value.empty()) {
    throw ValidationError("missing required option " + std::string(flag));
  }
  return value;
}

EnergyCoefficients Coefficients(const RunConfig& c) {
  EnergyCoefficients coeffs;
  coeffs.mul = c.coeff_mul;
  coeffs.add = c.coeff_add;
  coeffs.reg = c.coeff_reg;
  coeffs.wire = c.coeff_wire;
  coeffs.sram = c.coeff_sram;
  coeffs.include_memory = c.memory_model == "on";
  validate(coeffs);
  return coeffs;
}

SearchSettings Settings(const RunConfig& c) {
  SearchSettings s;
  s.target = c.target;
  s.min_bits = c.bits_min;
  s.max_bits = c.bits_max;
  s.sample_limit = 0;  // subsets are selected up front with the seed
  s.top_k = c.top_k;
  s.workers = c.workers;
  validate(s);
  return s;
}

class Session {
 public:
  Session(const RunConfig& config, std::string command, std::ostream& out)
      : c_(config), out_(out) {
    meta_.command = std::move(command);
    meta_.top_k = c_.top_k;
    meta_.seed = c_.seed;
    meta_.skipping = c_.skip;
    meta_.coefficients = Coefficients(c_);
  }

  const NetworkGraph& net() {
    if (!net_) {
      net_ = std::make_unique<NetworkGraph>(
          load_model(Require(c_.model, "--model"),
                     Require(c_.weights, "--weights")));
      meta_.network = fs::path(c_.model).stem().string();
    }
    return *net_;
  }

  const Dataset& eval_data() {
    if (!eval_) {
      eval_ = load_mnist(Require(c_.mnist_images, "--mnist-images"),
                         Require(c_.mnist_labels, "--mnist-labels"));
      meta_.dataset = fs::path(c_.mnist_images).filename().string();
    }
    return *eval_;
  }

  Dataset eval_subset() {
    Dataset subset = select_subset(eval_data(), c_.samples, c_.seed);
    meta_.eval_samples = subset.size();
    return subset;
  }

  CalibrationProfile Calibrate() {
    const std::string images =
        c_.calib_images.empty() ? c_.mnist_images : c_.calib_images;
    const std::string labels =
        c_.calib_labels.empty() ? c_.mnist_labels : c_.calib_labels;
    const Dataset data = load_mnist(Require(images, "--calib-images"),
                                    Require(labels, "--calib-labels"));
    const Dataset subset = select_subset(data, c_.calib_samples, c_.seed);
    CalibrationProfile profile = calibrate(net(), subset, 0, c_.workers);
    meta_.calibration_data = fs::path(images).filename().string();
    meta_.calibration_samples = profile.samples;
    return profile;
  }

  // Scales under --policy, from --profile when given.
  ScaleSet Scales() {
    const ScalePolicy policy = parse_scale_policy(c_.policy);
    meta_.scaling_policy = std::string(to_string(policy));
    CalibrationProfile profile;
    if (!c_.profile.empty()) {
      profile = read_profile(c_.profile).profile;
      meta_.calibration_data = "profile:" + fs::path(c_.profile).filename().string();
      meta_.calibration_samples = profile.samples;
    } else {
      profile = Calibrate();
    }
    ScaleSet scales = derive_scales(profile, policy);
    validate(uniform_config(scales, kMaxBits), net());
    return scales;
  }

  RunMetadata& meta() { return meta_; }
  Skipping skipping() const { return parse_skipping(c_.skip); }

  void Emit(const ResultsDocument& doc) {
    if (c_.out.empty()) return;
    write_results(doc, c_.out, parse_results_format(c_.format));
    out_ << "wrote " << c_.out << "\n";
  }

 private:
  const RunConfig& c_;
  std::ostream& out_;
  RunMetadata meta_;
  std::unique_ptr<NetworkGraph> net_;
  std::optional<Dataset> eval_;
};

void PrintPoints(std::ostream& out, const std::vector<PointRecord>& points) {
  out << std::left << std::setw(12) << "point" << std::right << std::setw(10)
      << "rel_acc" << std::setw(12) << "E(skip)" << std::setw(12)
      << "E(noskip)" << std::setw(10) << "zero_in" << std::setw(10)
      << "zero_w" << "  bits(in/w)\n";
  out << std::fixed;
  for (const PointRecord& p : points) {
    out << std::left << std::setw(12) << p.label << std::right
        << std::setprecision(4) << std::setw(10) << p.relative_accuracy
        << std::setw(12) << p.rel_energy_skip << std::setw(12)
        << p.rel_energy_no_skip << std::setw(10) << p.mean_zero_frac_in
        << std::setw(10) << p.mean_zero_frac_w << "  ";
    for (const PointLayerRow& r : p.layers) {
      out << r.input_bits << '/' << r.weight_bits << ' ';
    }
    out << '\n';
  }
  out << std::defaultfloat;
}

int Calibrate(const RunConfig& c, std::ostream& out) {
  Session session(c, "calibrate", out);
  const std::string path = c.out.empty() ? c.profile : c.out;
  Require(path, "--out");
  const CalibrationProfile profile = session.Calibrate();
  const ScaleSet scales = derive_scales(profile, parse_scale_policy(c.policy));
  write_profile(path, profile, scales);

  out << "calibrated on " << profile.samples << " samples, policy "
      << c.policy << "\n";
  out << std::left << std::setw(10) << "layer" << std::right << std::setw(14)
      << "input_max" << std::setw(12) << "in_scale" << std::setw(14)
      << "weight_max" << std::setw(12) << "w_scale" << "\n";
  for (std::size_t i = 0; i < profile.layers.size(); ++i) {
    const LayerRange& r = profile.layers[i];
    const LayerScales& s = scales.layers[i];
    out << std::left << std::setw(10) << r.layer << std::right
        << std::setw(14) << r.input_max_abs << std::setw(12)
        << QuantSpec(kMaxBits, s.input_exponent).scale() << std::setw(14)
        << r.weight_max_abs << std::setw(12)
        << QuantSpec(kMaxBits, s.weight_exponent).scale() << "\n";
  }
  out << "wrote " << path << "\n";
  return kOk;
}

int Sweep(const RunConfig& c, std::ostream& out) {
  Session session(c, "sweep", out);
  const NetworkGraph& net = session.net();
  const ScaleSet scales = session.Scales();
  const Dataset subset = session.eval_subset();
  const SearchSettings settings = Settings(c);
  const EnergyCoefficients coeffs = Coefficients(c);

  ResultsDocument doc;
  doc.meta = session.meta();
  const auto points = uniform_sweep(net, subset, scales, settings);
  for (const OperatingPoint& p : points) {
    const int bits = p.config.layers.front().input.bits();
    doc.points.push_back(make_point_record(
        static_cast<int>(doc.points.size()), "uniform", 0.0,
        "uniform-" + std::to_string(bits), p, net, coeffs, session.skipping()));
  }
  out << "uniform sweep on " << subset.size() << " samples, float top-"
      << c.top_k << " accuracy " << points.front().reference_accuracy << "\n";
  PrintPoints(out, doc.points);
  session.Emit(doc);
  return kOk;
}

int Energy(const RunConfig& c, std::ostream& out) {
  Session session(c, "energy", out);
  const NetworkGraph& net = session.net();
  const ScaleSet scales = session.Scales();
  const Dataset subset = session.eval_subset();
  const EnergyCoefficients coeffs = Coefficients(c);

  AccuracyEvaluator evaluator(net, subset, EvalOptions{c.top_k, 0, c.workers});
  const OperatingPoint point = evaluator.evaluate(uniform_config(scales, c.bits));
  ResultsDocument doc;
  doc.meta = session.meta();
  doc.points.push_back(make_point_record(0, "uniform", 0.0,
                                         "uniform-" + std::to_string(c.bits),
                                         point, net, coeffs,
                                         session.skipping()));
  const PointRecord& p = doc.points.front();
  out << "uniform " << c.bits << "-bit, skipping " << c.skip
      << ": relative energy " << p.rel_energy << ", relative accuracy "
      << p.relative_accuracy << "\n";
  out << std::left << std::setw(10) << "layer" << std::right << std::setw(14)
      << "macs/sample" << std::setw(14) << "skip_frac" << std::setw(14)
      << "energy_share" << "\n";
  double baseline = 0.0;
  for (const auto& r : p.layers) baseline += r.baseline_energy;
  for (const auto& r : p.layers) {
    out << std::left << std::setw(10) << r.layer << std::right
        << std::setw(14) << r.total_macs / std::max<std::size_t>(point.samples, 1)
        << std::setw(14) << std::fixed << std::setprecision(4)
        << (r.total_macs ? static_cast<double>(r.skipped_macs) / r.total_macs : 0.0)
        << std::setw(14) << r.energy / baseline << std::defaultfloat << "\n";
  }
  session.Emit(doc);
  return kOk;
}

int Search(const RunConfig& c, std::ostream& out) {
  Session session(c, "search", out);
  const NetworkGraph& net = session.net();
  const ScaleSet scales = session.Scales();
  const Dataset subset = session.eval_subset();
  const SearchSettings settings = Settings(c);
  const EnergyCoefficients coeffs = Coefficients(c);

  std::ofstream log;
  if (!c.log.empty()) {
    log.open(c.log, std::ios::trunc);
    if (!log) throw IoError("cannot open '" + c.log + "' for writing");
  }
  const SearchObserver observer = [&](const SearchEvent& e) {
    if (!log.is_open()) return;
    log << nlohmann::json{{"layer", e.layer},
                          {"knob", std::string(to_string(e.knob))},
                          {"bits", e.bits},
                          {"relative_accuracy", e.relative_accuracy},
                          {"accepted", e.accepted}}
               .dump()
        << '\n'
        << std::flush;
  };

  const CaseReport cases =
      case_report(net, subset, scales, settings, coeffs, observer);

  // Re-evaluate the greedy point on the full validation set.
  const Dataset full = select_subset(session.eval_data(), c.full_samples, c.seed);
  const EvalOptions full_options{c.top_k, 0, c.workers};
  const EvalResult full_float =
      evaluate_accuracy(net, full, QuantConfig::Float(), full_options);
  const EvalResult full_quant = evaluate_accuracy(
      net, full, cases.greedy.point.config, full_options);

  ResultsDocument doc;
  doc.meta = session.meta();
  doc.meta.full_eval_samples = full.size();
  for (const EnergyCase& ec : cases.cases) {
    const bool greedy = ec.label == "D";
    const Skipping skip = ec.label == "A" || ec.label == "B" ? Skipping::kOff
                                                              : Skipping::kOn;
    PointRecord record = make_point_record(
        static_cast<int>(doc.points.size()), greedy ? "per-layer" : "uniform",
        greedy ? c.target : (ec.label == "A" ? 0.0 : 1.0), "case-" + ec.label,
        ec.point, net, coeffs, skip);
    if (greedy) {
      record.full_samples = full.size();
      record.full_accuracy = full_quant.accuracy;
      record.full_reference_accuracy = full_float.accuracy;
      record.full_relative_accuracy =
          full_float.accuracy > 0 ? full_quant.accuracy / full_float.accuracy
                                  : 0.0;
    }
    doc.cases.push_back({ec.label, ec.description, record.id,
                         ec.energy.relative_energy, record.relative_accuracy});
    doc.points.push_back(std::move(record));
  }

  const PointRecord& d = doc.points.back();
  out << (cases.greedy.feasible ? "greedy search" : "greedy search INFEASIBLE")
      << " at target " << c.target << " on " << subset.size() << " samples ("
      << cases.greedy.candidate_evaluations << " candidates)\n";
  out << "full-set relative accuracy " << *d.full_relative_accuracy << " on "
      << full.size() << " samples (search subset: " << d.relative_accuracy
      << ")\n";
  PrintPoints(out, doc.points);
  out << "cases:";
  for (const CaseRecord& r : doc.cases) {
    out << ' ' << r.label << '=' << r.relative_energy;
  }
  out << "\n";
  session.Emit(doc);
  return cases.greedy.feasible ? kOk : kInfeasibleTarget;
}

int Report(const RunConfig& c, std::ostream& out) {
  const ResultsDocument doc = read_results(Require(c.input, "--in"));
  if (c.out.empty()) {
    if (parse_results_format(c.format) == ResultsFormat::kCsv) {
      out << to_csv(doc);
    } else {
      out << doc.meta.command << " on " << doc.meta.network << " ("
          << doc.meta.eval_samples << " samples, policy "
          << doc.meta.scaling_policy << ")\n";
      PrintPoints(out, doc.points);
    }
    return kOk;
  }
  write_results(doc, c.out, parse_results_format(c.format));
  out << "wrote " << c.out << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"qnet: fixed-point ConvNet quantization and energy toolkit"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  RunConfig config;
  AddOptions(app, config);
  auto* calibrate_cmd =
      app.add_subcommand("calibrate", "Record per-layer maxima and scales");
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Uniform bit-width sweep with energy");
  auto* search_cmd = app.add_subcommand(
      "search", "Greedy per-layer search plus energy cases A-D");
  auto* energy_cmd =
      app.add_subcommand("energy", "Energy breakdown of one uniform width");
  auto* report_cmd =
      app.add_subcommand("report", "Re-emit a results document");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "qnet: " << e.what() << "\n";
    return kValidationError;
  }

  try {
    if (*calibrate_cmd) return Calibrate(config, out);
    if (*sweep_cmd) return Sweep(config, out);
    if (*search_cmd) return Search(config, out);
    if (*energy_cmd) return Energy(config, out);
    if (*report_cmd) return Report(config, out);
  } catch (const IoError& e) {
    err << "qnet: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "qnet: " << e.what() << "\n";
    return kValidationError;
  }
  return kValidationError;
}

}  // namespace qnet::cli
