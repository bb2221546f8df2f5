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

#include "morphsep/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "morphsep/error.hpp"
#include "morphsep/experiment.hpp"
#include "morphsep/io.hpp"
#include "morphsep/sas.hpp"

namespace morphsep {

namespace {

namespace fs = std::filesystem;
namespace ex = experiment;

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

fs::path default_output_dir() {
  if (const char* env = std::getenv("MORPHSEP_OUTPUT_DIR"); env && *env) return env;
  return "morphsep-out";
}

struct SeparateOptions {
  std::string input;
  std::string method = "fft";
  std::string mode = "bpd";
  std::optional<double> lambda_frac;
  std::optional<double> lambda;
  double mu = 1.0;
  std::size_t iters = 1000;
  std::string envelopes;
  double sample_rate = 0.0;
  bool coefficients = false;
  std::size_t workers = 1;
};

struct GenerateOptions {
  std::string kind;
  std::string config;
  std::optional<double> snr_db;
  std::uint64_t seed = 1;
  std::size_t angles = 8;
};

struct SweepOptions {
  std::string spec;
  std::string recipe;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::optional<std::size_t> workers;
};

struct ImageOptions {
  std::string scan;
  std::string grid;
  std::size_t pixels = 128;
  double half_extent = 0.2;
  bool per_frequency = false;
};

struct ExperimentOptions {
  std::string name;
  std::uint64_t seed = 1;
};

bool is_scan(const fs::path& p) {
  return fs::is_directory(p) || p.filename() == "scan.json";
}

ex::FramePair frames_for(const SeparateOptions& o, std::size_t n, double fs) {
  const ex::Method method = ex::method_from_string(o.method);
  if (method == ex::Method::Fft) {
    if (!o.envelopes.empty()) throw InvalidParameter("--envelopes only applies to --method esp");
    return ex::fft_frames(n);
  }
  EnvelopeConfig short_env = ex::analytic_short_envelopes();
  EnvelopeConfig long_env = ex::analytic_long_envelopes();
  if (!o.envelopes.empty()) {
    const nlohmann::json j = io::read_json(o.envelopes);
    if (!j.contains("short") || !j.contains("long"))
      throw FormatError("envelope file needs 'short' and 'long' entries");
    short_env = envelope_config_from_json(j["short"]);
    long_env = envelope_config_from_json(j["long"]);
  }
  return ex::esp_frames(short_env, long_env, n, fs);
}

SolverConfig solver_for(const SeparateOptions& o) {
  SolverConfig cfg;
  cfg.mode = solver_mode_from_string(o.mode);
  cfg.mu = o.mu;
  cfg.max_iters = o.iters;
  if (o.lambda) {
    cfg.lambda1 = cfg.lambda2 = *o.lambda;
  } else {
    cfg.lambda_fraction = o.lambda_frac.value_or(0.01);
  }
  cfg.validate();
  return cfg;
}

void run_separate(const SeparateOptions& o, const fs::path& out) {
  const SolverConfig cfg = solver_for(o);
  nlohmann::json meta{{"input", fs::path(o.input).filename().string()},
                      {"method", o.method},
                      {"solver", to_json(cfg)}};
  if (is_scan(o.input)) {
    const sas::CircularScan scan = sas::ingest_scan(o.input);
    const ex::FramePair f = frames_for(o, scan.samples(), scan.sample_rate());
    const sas::ScanSeparation sep =
        sas::separate_scan(scan, *f.a1, *f.a2, cfg, kImagingEarly, kImagingLate, o.workers);
    sas::export_scan(sep.short_scan, out / "short");
    sas::export_scan(sep.long_scan, out / "long");
    meta["angles"] = scan.size();
    meta["failures"] = sep.failures;
    meta["errors"] = sep.errors;
    meta["mean_m1"] = sep.mean_m1;
    meta["std_m1"] = sep.std_m1;
    meta["mean_m2"] = sep.mean_m2;
    meta["std_m2"] = sep.std_m2;
    meta["metric_count"] = sep.metric_count;
    io::write_json(out / "metrics.json", meta);
    if (sep.failures) throw Error(std::to_string(sep.failures) + " angle(s) failed to separate");
    return;
  }
  const Signal y = io::read_signal(o.input, o.sample_rate);
  const ex::FramePair f = frames_for(o, y.size(), y.sample_rate());
  const SeparationResult r = solve_mca(y, *f.a1, *f.a2, cfg);
  io::write_separation(out, r, meta, o.coefficients);
}

void run_generate(const GenerateOptions& o, const fs::path& out) {
  fs::create_directories(out);
  std::optional<nlohmann::json> config;
  if (!o.config.empty()) config = io::read_json(o.config);
  if (o.kind == "spike-sine") {
    const std::size_t n = config ? config->value("N", std::size_t{1000}) : 1000;
    const double fs = config ? config->value("sample_rate", 10e3) : 10e3;
    const std::size_t spike = config ? config->value("spike_index", std::size_t{50}) : 50;
    const double tone = config ? config->value("tone_frequency", 1000.0) : 1000.0;
    const Decomposition d = spike_plus_sine(n, fs, spike, tone);
    io::write_signal(out / "mixture", d.mixture);
    io::write_signal(out / "short_truth", d.short_part);
    io::write_signal(out / "long_truth", d.long_part);
  } else if (o.kind == "oscillator") {
    const OscillatorSpec spec = config ? oscillator_spec_from_json(*config) : OscillatorSpec{};
    const OscillatorSolution s = driven_oscillator(spec);
    io::write_signal(out / "mixture", s.total);
    io::write_signal(out / "short_truth", s.homogeneous);
    io::write_signal(out / "long_truth", s.particular);
    io::write_json(out / "oscillator.json", to_json(spec));
  } else if (o.kind == "target") {
    const ex::TargetRecipe recipe = config ? ex::target_recipe_from_json(*config) : ex::TargetRecipe::desk();
    const ex::RecipeSignals sig = ex::render(recipe);
    io::write_signal(out / "mixture", sig.clean);
    io::write_signal(out / "short_truth", sig.short_truth);
    io::write_signal(out / "long_truth", sig.long_truth);
    if (o.snr_db) io::write_signal(out / "noisy", ex::noisy_realization(recipe, *o.snr_db, o.seed));
    nlohmann::json meta{{"recipe", ex::to_json(recipe)}, {"seed", o.seed}};
    if (o.snr_db) meta["snr_db"] = *o.snr_db;
    io::write_json(out / "target.json", meta);
  } else if (o.kind == "scene") {
    sas::DeskSceneSpec spec;
    if (config && config->contains("target")) spec.target = target_spec_from_json((*config)["target"]);
    if (config) {
      spec.geometry.standoff_distance = config->value("standoff_distance", spec.geometry.standoff_distance);
      spec.geometry.sound_speed = config->value("sound_speed", spec.geometry.sound_speed);
    }
    spec.angle_count = o.angles;
    spec.snr_db = o.snr_db;
    spec.seed = o.seed;
    const sas::SceneScans s = sas::desk_scene(spec);
    sas::export_scan(s.mixture, out / "mixture");
    sas::export_scan(s.short_truth, out / "short_truth");
    sas::export_scan(s.long_truth, out / "long_truth");
  } else {
    throw InvalidParameter("unknown signal kind '" + o.kind +
                           "' (expected spike-sine, oscillator, target or scene)");
  }
}

void run_sweep(const SweepOptions& o, const fs::path& out) {
  ex::SweepSpec spec = o.spec.empty() ? ex::SweepSpec{} : ex::sweep_spec_from_json(io::read_json(o.spec));
  if (o.seed) spec.seed = *o.seed;
  if (o.realizations) spec.realizations = *o.realizations;
  if (o.workers) spec.workers = *o.workers;
  const ex::TargetRecipe recipe =
      o.recipe.empty() ? ex::TargetRecipe::desk() : ex::target_recipe_from_json(io::read_json(o.recipe));
  const ex::SweepResult r = ex::run_noise_sweep(spec, recipe);
  fs::create_directories(out);
  ex::write_sweep(out, r);
  io::write_json(out / "recipe.json", ex::to_json(recipe));
  for (const auto& b : r.best)
    std::cout << "snr " << b.snr_db << " dB: best m1 " << b.mean_m1 << " (lambda " << b.m1_lambda_fraction
              << "), best m2 " << b.mean_m2 << " (lambda " << b.m2_lambda_fraction << ")\n";
}

void run_image(const ImageOptions& o, const fs::path& out) {
  const sas::CircularScan scan = sas::ingest_scan(o.scan);
  const sas::GridSpec grid =
      o.grid.empty() ? sas::GridSpec::centered(o.half_extent, o.pixels) : sas::grid_spec_from_json(io::read_json(o.grid));
  fs::create_directories(out);
  const sas::SasImage img = sas::backproject(scan, grid);
  sas::export_image(img, out / "image");
  const sas::TargetStrength nts = sas::normalized_target_strength(
      scan, o.per_frequency ? sas::NtsNormalization::PerFrequency : sas::NtsNormalization::Global);
  io::write_grid_csv(out / "nts.csv", nts.db, nts.frequencies.size(), nts.angles.size());
  io::write_json(out / "nts.json", {{"frequencies", nts.frequencies},
                                    {"angles", nts.angles},
                                    {"normalization", o.per_frequency ? "per-frequency" : "global"}});
  io::write_grid_csv(out / "kspace.csv", sas::k_space(img), img.ny, img.nx);
}

int run_experiment(const ExperimentOptions& o, const fs::path& out) {
  const ex::ExperimentReport rep = ex::run_canned_experiment(o.name, out, o.seed);
  for (const auto& [k, v] : rep.metrics.at("checks").items())
    std::cout << k << ": " << (v.at("passed").get<bool>() ? "pass" : "FAIL")
              << (v.contains("value") ? " (" + v["value"].dump() + ")" : std::string()) << '\n';
  std::cout << rep.name << (rep.passed ? " passed\n" : " failed\n");
  return rep.passed ? 0 : kRuntimeFailure;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Morphological component separation of acoustic time series"};
  app.require_subcommand(1);
  std::string out_dir;
  app.add_option("-o,--out", out_dir, "Output directory (default: $MORPHSEP_OUTPUT_DIR or ./morphsep-out)");

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write synthetic signals or scans with ground truth");
  g->add_option("kind", gen.kind, "spike-sine | oscillator | target | scene")->required();
  g->add_option("--config", gen.config, "JSON parameters for the generator");
  g->add_option("--snr", gen.snr_db, "Also write a noisy realization at this SNR in dB");
  g->add_option("--seed", gen.seed, "Noise seed");
  g->add_option("--angles", gen.angles, "Number of scan angles (scene)")->check(CLI::PositiveNumber);

  SeparateOptions sep;
  auto* s = app.add_subcommand("separate", "Separate one signal (CSV) or one scan (directory)");
  s->add_option("input", sep.input, "Signal CSV, or scan directory / scan.json")->required()->check(CLI::ExistingPath);
  s->add_option("--method", sep.method, "fft | esp")->check(CLI::IsMember({"fft", "esp"}));
  s->add_option("--mode", sep.mode, "bp | bpd")->check(CLI::IsMember({"bp", "bpd"}));
  auto* frac = s->add_option("--lambda-frac", sep.lambda_frac, "Weight as a fraction of lambda_max (default 0.01)");
  s->add_option("--lambda", sep.lambda, "Absolute weight for both components")->excludes(frac);
  s->add_option("--mu", sep.mu, "ADMM penalty")->check(CLI::PositiveNumber);
  s->add_option("--iters", sep.iters, "Iteration budget")->check(CLI::PositiveNumber);
  s->add_option("--envelopes", sep.envelopes, "JSON file with 'short' and 'long' envelope descriptions")
      ->check(CLI::ExistingFile);
  s->add_option("--sample-rate", sep.sample_rate, "Sample rate when the CSV has no JSON header");
  s->add_flag("--coefficients", sep.coefficients, "Also write nonzero coefficients");
  s->add_option("--workers", sep.workers, "Parallel angles for scans")->check(CLI::PositiveNumber);

  SweepOptions sw;
  auto* w = app.add_subcommand("sweep", "Noise and lambda sweep over seeded realizations");
  w->add_option("spec", sw.spec, "SweepSpec JSON (defaults when omitted)")->check(CLI::ExistingFile);
  w->add_option("--recipe", sw.recipe, "Target recipe JSON")->check(CLI::ExistingFile);
  w->add_option("--seed", sw.seed, "Base seed (overrides the sweep file)");
  w->add_option("--realizations", sw.realizations, "Realizations per cell (overrides the sweep file)")
      ->check(CLI::PositiveNumber);
  w->add_option("--workers", sw.workers, "Worker threads")->check(CLI::PositiveNumber);

  ImageOptions im;
  auto* i = app.add_subcommand("image", "Backprojected image, target strength and k-space of a scan");
  i->add_option("scan", im.scan, "Scan directory or scan.json")->required()->check(CLI::ExistingPath);
  i->add_option("--grid", im.grid, "GridSpec JSON")->check(CLI::ExistingFile);
  i->add_option("--pixels", im.pixels, "Pixels per side")->check(CLI::PositiveNumber);
  i->add_option("--extent", im.half_extent, "Half width of the square scene in metres")->check(CLI::PositiveNumber);
  i->add_flag("--per-frequency", im.per_frequency, "Normalize target strength per frequency");

  ExperimentOptions exo;
  auto* e = app.add_subcommand("experiment", "Run a canned experiment");
  std::string names;
  for (const auto& n : ex::experiment_names()) names += (names.empty() ? "" : " | ") + n;
  e->add_option("name", exo.name, names)->required();
  e->add_option("--seed", exo.seed, "Seed for randomized experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kUsageError;
  }

  const fs::path out = out_dir.empty() ? default_output_dir() : fs::path(out_dir);
  try {
    if (*g) run_generate(gen, out);
    else if (*s) run_separate(sep, out);
    else if (*w) run_sweep(sw, out);
    else if (*i) run_image(im, out);
    else return run_experiment(exo, out);
  } catch (const InvalidParameter& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsageError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}

}  // namespace morphsep
