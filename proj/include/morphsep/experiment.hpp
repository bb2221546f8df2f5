// SPDX-License-Identifier: Apache-2.0
//
// morphsep - morphological component separation for acoustic time series
// Copyright (C) 2026 The morphsep authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "morphsep/esp_frame.hpp"
#include "morphsep/frame.hpp"
#include "morphsep/signal_lab.hpp"
#include "morphsep/solver.hpp"

namespace morphsep::experiment {

namespace fs = std::filesystem;

enum class Method { Fft, Esp };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct FramePair {
  FramePtr a1;  ///< short-duration frame
  FramePtr a2;  ///< long-duration frame
};

/// Identity and unitary DFT.
FramePair fft_frames(std::size_t n);
/// Two ESP frames built from envelope descriptions (normalised when the
/// description asks for it, which is the default).
FramePair esp_frames(const EnvelopeConfig& short_env, const EnvelopeConfig& long_env, std::size_t n,
                     double sample_rate);

// Envelope presets. Durations and time constants in seconds.
EnvelopeConfig rectangular_config(const std::vector<double>& durations);
EnvelopeConfig exponential_config(const std::vector<double>& time_constants);
/// Windows of 0.27, 0.54 and 0.1 ms.
EnvelopeConfig analytic_short_envelopes();
/// Decays of 1.78 to 31.62 ms, log spaced.
EnvelopeConfig analytic_long_envelopes();
/// Windows of 0.07, 0.27 and 0.54 ms.
EnvelopeConfig noisy_short_envelopes();
/// Decays of 3.16 to 31.62 ms.
EnvelopeConfig noisy_long_envelopes();
/// Windows of 0.01 and 0.05 ms, retuned for the imaging data.
EnvelopeConfig imaging_short_envelopes();
/// Decays of 1.00 to 31.62 ms.
EnvelopeConfig imaging_long_envelopes();

enum class MetricReference {
  Clean,  ///< m1, m2 against the clean mixture
  Truth,  ///< m1 against the short truth, m2 against the long truth
};

/// A synthetic target passed through the LFM chain, with the intervals the
/// metrics use.
struct TargetRecipe {
  SyntheticTargetSpec target = SyntheticTargetSpec::desk_default();
  LfmProcessing processing{};
  Interval i1 = kAnalyticEarly;
  Interval i2 = kAnalyticLate;
  MetricReference reference = MetricReference::Clean;

  /// Periodic desk target with circular LFM processing.
  static TargetRecipe desk();
};

struct RecipeSignals {
  Signal clean;        ///< short_truth + long_truth
  Signal short_truth;  ///< processed short-duration part
  Signal long_truth;   ///< processed long-duration part
};

RecipeSignals render(const TargetRecipe& recipe);
/// Noise is added to the echo before matched filtering, at `snr_db`
/// against the mean echo power.
Signal noisy_realization(const TargetRecipe& recipe, double snr_db, std::uint64_t seed);
IntervalMetrics recipe_metrics(const TargetRecipe& recipe, const RecipeSignals& sig, const Signal& y1,
                               const Signal& y2);

struct SweepSpec {
  std::vector<double> snr_db{10.0, 20.0, 30.0, 40.0};
  std::vector<double> lambda_fractions = default_lambda_grid();
  std::size_t realizations = 20;
  std::uint64_t seed = 1;
  Method method = Method::Fft;
  EnvelopeConfig short_envelopes = noisy_short_envelopes();
  EnvelopeConfig long_envelopes = noisy_long_envelopes();
  std::size_t iterations = 1000;
  double mu = 1.0;
  std::size_t workers = 1;

  /// 10^(-3 + 0.25 j) for j = 0..11.
  static std::vector<double> default_lambda_grid();
  void validate() const;
};

struct SweepRecord {
  std::size_t snr_index = 0;
  std::size_t lambda_index = 0;
  std::size_t realization = 0;
  double snr_db = 0.0;
  double lambda_fraction = 0.0;
  std::uint64_t seed = 0;
  bool ok = true;
  double m1 = 0.0;
  double m2 = 0.0;
  std::string error;
};

struct SweepAggregate {
  std::size_t snr_index = 0;
  std::size_t lambda_index = 0;
  double snr_db = 0.0;
  double lambda_fraction = 0.0;
  std::size_t count = 0;     ///< records that entered the statistics
  std::size_t failures = 0;  ///< records excluded after a solver or metric failure
  double mean_m1 = 0.0, std_m1 = 0.0;
  double mean_m2 = 0.0, std_m2 = 0.0;
};

/// The lambda minimising each mean metric at one SNR (chosen independently
/// for m1 and m2).
struct BestLambda {
  double snr_db = 0.0;
  std::size_t m1_lambda_index = 0;
  double m1_lambda_fraction = 0.0;
  double mean_m1 = 0.0, std_m1 = 0.0;
  std::size_t m2_lambda_index = 0;
  double m2_lambda_fraction = 0.0;
  double mean_m2 = 0.0, std_m2 = 0.0;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRecord> records;
  std::vector<SweepAggregate> aggregates;
  std::vector<BestLambda> best;
};

/// Seed of one (snr, realization) cell; every lambda at that cell sees the
/// same noise.
std::uint64_t cell_seed(std::uint64_t base, std::size_t snr_index, std::size_t realization);

SweepResult run_noise_sweep(const SweepSpec& spec, const TargetRecipe& recipe);
/// Means and sample standard deviations recomputed from raw records.
std::vector<SweepAggregate> aggregate(const SweepSpec& spec, const std::vector<SweepRecord>& records);
std::vector<BestLambda> best_lambdas(const SweepSpec& spec, const std::vector<SweepAggregate>& aggregates);

nlohmann::json to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TargetRecipe& recipe);
TargetRecipe target_recipe_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepResult& result);
/// records.csv (one row per record), aggregates.csv, best_lambda.csv, sweep.json.
void write_sweep(const fs::path& dir, const SweepResult& result);

struct ExperimentReport {
  std::string name;
  bool passed = false;
  nlohmann::json metrics;
};

std::vector<std::string> experiment_names();
/// Runs one canned recipe, writing its signals and metrics under `out_dir`.
/// Throws InvalidParameter naming the valid recipes for an unknown name.
ExperimentReport run_canned_experiment(const std::string& name, const fs::path& out_dir,
                                       std::uint64_t seed = 1);

}  // namespace morphsep::experiment
