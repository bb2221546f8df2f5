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

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>

#include "morphsep/error.hpp"
#include "morphsep/experiment.hpp"
#include "morphsep/io.hpp"
#include "support.hpp"

using namespace morphsep;
using namespace morphsep::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "morphsep_test_experiment" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TargetRecipe small_recipe() {
  TargetRecipe r = TargetRecipe::desk();
  r.target.n = 256;
  r.i1 = {1.0e-3, 1.5e-3};
  r.i2 = {1.5e-3, 2.56e-3};
  return r;
}

SweepSpec small_spec() {
  SweepSpec s;
  s.snr_db = {20.0};
  s.lambda_fractions = {0.01, 0.1};
  s.realizations = 2;
  s.iterations = 100;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("Default lambda grid") {
  const auto g = SweepSpec::default_lambda_grid();
  REQUIRE(g.size() == 12);
  CHECK(g.front() == 1e-3);
  CHECK(std::abs(g[4] - 1e-2) < 1e-17);
  CHECK(std::abs(g.back() - std::pow(10.0, -0.25)) < 1e-15);
}

TEST_CASE("Envelope presets") {
  const EnvelopeConfig s = analytic_short_envelopes();
  REQUIRE(s.entries.size() == 3);
  CHECK(s.entries[0].param == 0.27e-3);
  CHECK(s.entries[2].param == 0.1e-3);
  CHECK(analytic_long_envelopes().entries.back().param == 31.62e-3);
  CHECK(noisy_short_envelopes().entries.front().param == 0.07e-3);
  CHECK(noisy_long_envelopes().entries.size() == 5);
  CHECK(imaging_short_envelopes().entries.size() == 2);
  CHECK(imaging_long_envelopes().entries.front().param == 1.0e-3);
  const FramePair f = esp_frames(analytic_short_envelopes(), analytic_long_envelopes(), 64, 100e3);
  CHECK(std::abs(f.a1->frame_constant() - 1.0) < 1e-12);
  CHECK(f.a2->coeff_shape() == std::vector<std::size_t>{6, 64, 64});
  CHECK(method_from_string("esp") == Method::Esp);
  CHECK_THROWS_AS(method_from_string("wavelet"), InvalidParameter);
}

TEST_CASE("Small sweep produces one record per cell with hand-checkable aggregates") {
  const SweepSpec spec = small_spec();
  const TargetRecipe recipe = small_recipe();
  const SweepResult r = run_noise_sweep(spec, recipe);
  REQUIRE(r.records.size() == 4);
  REQUIRE(r.aggregates.size() == 2);
  for (std::size_t li = 0; li < 2; ++li) {
    const SweepRecord& a = r.records[li * 2 + 0];
    const SweepRecord& b = r.records[li * 2 + 1];
    REQUIRE(a.ok);
    REQUIRE(b.ok);
    CHECK(a.lambda_index == li);
    CHECK(a.realization == 0);
    CHECK(b.realization == 1);
    const SweepAggregate& g = r.aggregates[li];
    CHECK(g.count == 2);
    CHECK(std::abs(g.mean_m1 - (a.m1 + b.m1) / 2.0) < 1e-15);
    CHECK(std::abs(g.std_m1 - std::abs(a.m1 - b.m1) / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(g.mean_m2 - (a.m2 + b.m2) / 2.0) < 1e-15);
  }
  // Both lambdas see the same noise realization.
  CHECK(r.records[0].seed == r.records[2].seed);
  CHECK(r.records[0].seed != r.records[1].seed);
  // Best lambda picks each metric separately.
  REQUIRE(r.best.size() == 1);
  const double m1a = r.aggregates[0].mean_m1, m1b = r.aggregates[1].mean_m1;
  CHECK(r.best[0].mean_m1 == std::min(m1a, m1b));
  CHECK(r.best[0].mean_m2 == std::min(r.aggregates[0].mean_m2, r.aggregates[1].mean_m2));
}

TEST_CASE("Sweeps are deterministic and independent of the worker count") {
  SweepSpec spec = small_spec();
  spec.realizations = 3;
  const SweepResult a = run_noise_sweep(spec, small_recipe());
  spec.workers = 3;
  const SweepResult b = run_noise_sweep(spec, small_recipe());
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].m1 == b.records[i].m1);
    CHECK(a.records[i].m2 == b.records[i].m2);
  }
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("Aggregates recompute from raw records and skip failures") {
  SweepSpec spec = small_spec();
  std::vector<SweepRecord> recs;
  const double m1s[] = {0.2, 0.4, 0.9};
  for (std::size_t r = 0; r < 3; ++r) {
    SweepRecord rec;
    rec.snr_index = 0;
    rec.lambda_index = 1;
    rec.realization = r;
    rec.m1 = m1s[r];
    rec.m2 = 1.0;
    recs.push_back(rec);
  }
  recs[2].ok = false;
  recs[2].error = "diverged";
  const auto agg = aggregate(spec, recs);
  CHECK(agg[0].count == 0);
  CHECK(agg[1].count == 2);
  CHECK(agg[1].failures == 1);
  CHECK(std::abs(agg[1].mean_m1 - 0.3) < 1e-15);
  CHECK(std::abs(agg[1].std_m1 - std::sqrt(0.02)) < 1e-15);
  const auto best = best_lambdas(spec, agg);
  CHECK(best[0].m1_lambda_index == 1);

  SweepRecord stray;
  stray.snr_index = 4;
  CHECK_THROWS_AS(aggregate(spec, {stray}), InvalidDimension);
}

TEST_CASE("Cell seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::size_t s = 0; s < 8; ++s)
    for (std::size_t r = 0; r < 100; ++r) seen.insert(cell_seed(1, s, r));
  CHECK(seen.size() == 800);
  CHECK(cell_seed(1, 2, 3) == cell_seed(1, 2, 3));
  CHECK(cell_seed(1, 2, 3) != cell_seed(2, 2, 3));
}

TEST_CASE("Sweep spec validation and JSON") {
  SweepSpec s = small_spec();
  s.method = Method::Esp;
  const SweepSpec back = sweep_spec_from_json(to_json(s));
  CHECK(back.snr_db == s.snr_db);
  CHECK(back.lambda_fractions == s.lambda_fractions);
  CHECK(back.method == Method::Esp);
  CHECK(back.short_envelopes.entries.size() == 3);
  s.snr_db.clear();
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s = small_spec();
  s.realizations = 0;
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s = small_spec();
  s.lambda_fractions = {0.1, -1.0};
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  CHECK_THROWS_AS(sweep_spec_from_json(nlohmann::json::parse(R"({"snr_db": "loud"})")), FormatError);

  TargetRecipe r = small_recipe();
  r.reference = MetricReference::Truth;
  const TargetRecipe rb = target_recipe_from_json(to_json(r));
  CHECK(rb.target.n == 256);
  CHECK(rb.i2.end == 2.56e-3);
  CHECK(rb.reference == MetricReference::Truth);
  CHECK(rb.processing.circular);
  CHECK_THROWS_AS(target_recipe_from_json(nlohmann::json::parse(R"({"reference": "both"})")), FormatError);
}

TEST_CASE("Sweep output files") {
  const fs::path dir = scratch("files");
  const SweepResult r = run_noise_sweep(small_spec(), small_recipe());
  write_sweep(dir, r);
  std::ifstream in(dir / "records.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 5);
  CHECK(fs::exists(dir / "aggregates.csv"));
  CHECK(fs::exists(dir / "best_lambda.csv"));
  const nlohmann::json j = io::read_json(dir / "sweep.json");
  CHECK(j["records"] == 4);
  CHECK(j["failed_records"] == 0);
}

TEST_CASE("Recipe rendering keeps exact ground truth") {
  const TargetRecipe r = TargetRecipe::desk();
  const RecipeSignals s = render(r);
  CHECK(testing::rel_diff(s.clean.vec(), (s.short_truth + s.long_truth).vec()) < 1e-15);
  const Signal n1 = noisy_realization(r, 10.0, 3), n2 = noisy_realization(r, 10.0, 3);
  CHECK(n1.vec() == n2.vec());
  const double snr = 10.0 * std::log10(norm_sq(s.clean.samples()) / norm_sq((n1 - s.clean).samples()));
  CHECK(snr > 10.0);  // matched filtering adds processing gain
}

TEST_CASE("Canned experiments") {
  const fs::path dir = scratch("canned");
  try {
    run_canned_experiment("nope", dir);
    FAIL("unknown name accepted");
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("ode-esp") != std::string::npos);
  }
  const ExperimentReport spike = run_canned_experiment("spike-sine-fft", dir);
  CHECK(spike.passed);
  CHECK(fs::exists(dir / "spike-sine-fft" / "metrics.json"));
  CHECK(fs::exists(dir / "spike-sine-fft" / "y1.csv"));
  const ExperimentReport zero = run_canned_experiment("lambda-max-zero", dir, 3);
  CHECK(zero.passed);
  CHECK(zero.metrics["runs"].size() == 10);
  CHECK(experiment_names().size() == 8);
}
