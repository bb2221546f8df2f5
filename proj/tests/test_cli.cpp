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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "morphsep/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "morphsep_test_cli";

int run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + MORPHSEP_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& rel) { return (kRoot / rel).string(); }

}  // namespace

TEST_CASE("Usage errors exit with 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("separate --method wavelet x.csv") == 2);
  CHECK(run("separate " + p("does-not-exist.csv")) == 2);
  CHECK(run("experiment no-such-recipe -o " + p("unused")) == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("Generate, separate and inspect outputs") {
  fs::remove_all(kRoot);
  REQUIRE(run("-o " + p("gen") + " generate spike-sine") == 0);
  CHECK(fs::exists(kRoot / "gen" / "mixture.csv"));
  REQUIRE(run("-o " + p("sep") + " separate --method fft --mode bp --iters 1000 " + p("gen/mixture.csv")) == 0);
  for (const char* f : {"y1.csv", "y2.csv", "metrics.json"}) CHECK(fs::exists(kRoot / "sep" / f));
  const auto m = morphsep::io::read_json(kRoot / "sep" / "metrics.json");
  CHECK(m["iterations_run"] == 1000);
  CHECK(m["solver"]["mode"] == "bp");

  // ESP separation with envelopes from a JSON file.
  std::ofstream(kRoot / "env.json") << R"({"short": {"envelopes": [{"kind": "rectangular", "param": 1e-3}]},
                                           "long": {"envelopes": [{"kind": "exponential", "param": 0.02}]}})";
  CHECK(run("-o " + p("esp") + " separate --method esp --mode bpd --lambda-frac 0.1 --iters 3 --envelopes " +
            p("env.json") + " " + p("gen/mixture.csv")) == 0);
  CHECK(fs::exists(kRoot / "esp" / "y2.csv"));
}

TEST_CASE("Runtime failures exit with 1") {
  fs::create_directories(kRoot);
  std::ofstream(kRoot / "broken.csv") << "index,real,imag\n0,zero,0\n";
  CHECK(run("-o " + p("broken") + " separate --sample-rate 10 " + p("broken.csv")) == 1);
}

TEST_CASE("Output directory falls back to the environment") {
  fs::remove_all(kRoot / "envout");
  CHECK(run("generate oscillator", "MORPHSEP_OUTPUT_DIR=" + p("envout")) == 0);
  CHECK(fs::exists(kRoot / "envout" / "mixture.csv"));
  CHECK(fs::exists(kRoot / "envout" / "oscillator.json"));
}

TEST_CASE("Scenes, scan separation, imaging and experiments") {
  REQUIRE(run("-o " + p("scene") + " generate scene --angles 4 --snr 20 --seed 3") == 0);
  CHECK(fs::exists(kRoot / "scene" / "mixture" / "scan.json"));
  REQUIRE(run("-o " + p("scansep") + " separate --mode bp --iters 50 " + p("scene/mixture")) == 0);
  CHECK(fs::exists(kRoot / "scansep" / "short" / "scan.json"));
  REQUIRE(run("-o " + p("img") + " image --pixels 32 " + p("scansep/short")) == 0);
  for (const char* f : {"image_magnitude.csv", "image.json", "nts.csv", "kspace.csv"})
    CHECK(fs::exists(kRoot / "img" / f));
  CHECK(run("-o " + p("exp") + " experiment spike-sine-fft") == 0);
  CHECK(fs::exists(kRoot / "exp" / "spike-sine-fft" / "metrics.json"));
  std::ofstream(kRoot / "sweep.json") << R"({"snr_db": [20], "lambda_fractions": [0.01, 0.1], "realizations": 2,
                                            "iterations": 50})";
  CHECK(run("-o " + p("sweep") + " sweep --seed 4 " + p("sweep.json")) == 0);
  CHECK(fs::exists(kRoot / "sweep" / "records.csv"));
}
