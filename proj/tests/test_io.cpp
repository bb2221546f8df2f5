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

#include "morphsep/error.hpp"
#include "morphsep/frame.hpp"
#include "morphsep/io.hpp"
#include "support.hpp"

using namespace morphsep;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "morphsep_test_io" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("Doubles print as shortest round-trip text") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0})
    CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("Signal CSV round trip is exact") {
  const fs::path dir = scratch("roundtrip");
  const Signal s(testing::random_cvec(33, 1), 12345.5);
  io::write_signal(dir / "sig", s, {"a", "b"});
  const Signal back = io::read_signal(dir / "sig.csv");
  CHECK(back.vec() == s.vec());
  CHECK(back.sample_rate() == 12345.5);
  const nlohmann::json meta = io::read_json(dir / "sig.json");
  CHECK(meta["N"] == 33);
  CHECK(meta["labels"] == nlohmann::json::array({"a", "b"}));
}

TEST_CASE("Signal CSV readers accept plain columns and reject bad rows") {
  const fs::path dir = scratch("formats");
  write_text(dir / "plain.csv", "1.5\n-2\n3e-1\n");
  CHECK(io::read_signal_csv(dir / "plain.csv") == CVec{{1.5, 0}, {-2, 0}, {0.3, 0}});
  write_text(dir / "two.csv", "index,real\n0,1\n1,2\n");
  CHECK(io::read_signal_csv(dir / "two.csv") == CVec{{1, 0}, {2, 0}});
  write_text(dir / "gap.csv", "index,real,imag\n0,1,0\n2,1,0\n");
  CHECK_THROWS_AS(io::read_signal_csv(dir / "gap.csv"), FormatError);
  write_text(dir / "text.csv", "index,real,imag\n0,abc,0\n");
  CHECK_THROWS_AS(io::read_signal_csv(dir / "text.csv"), FormatError);
  write_text(dir / "empty.csv", "index,real,imag\n");
  CHECK_THROWS_AS(io::read_signal_csv(dir / "empty.csv"), FormatError);
  CHECK_THROWS_AS(io::read_signal_csv(dir / "missing.csv"), FormatError);
  // No JSON header and no fallback rate.
  CHECK_THROWS_AS(io::read_signal(dir / "plain.csv"), FormatError);
  CHECK(io::read_signal(dir / "plain.csv", 8000.0).sample_rate() == 8000.0);
}

TEST_CASE("Separation bundle layout") {
  const fs::path dir = scratch("bundle");
  const std::size_t n = 16;
  SolverConfig c;
  c.lambda_fraction = 0.1;
  c.max_iters = 20;
  const SeparationResult r =
      solve_mca(Signal(testing::random_cvec(n, 2), 1.0), *identity_frame(n), *dft_frame(n), c);
  io::write_separation(dir, r, {{"note", "x"}}, true);
  for (const char* f : {"y1.csv", "y2.csv", "metrics.json", "objective.csv", "x1.csv", "x2.csv"})
    CHECK(fs::exists(dir / f));
  const nlohmann::json m = io::read_json(dir / "metrics.json");
  CHECK(m["note"] == "x");
  CHECK(m["iterations_run"] == 20);
  CHECK(io::read_signal_csv(dir / "y1.csv") == r.y1.vec());
}

TEST_CASE("Grid and table writers") {
  const fs::path dir = scratch("grid");
  io::write_grid_csv(dir / "g.csv", {1, 2, 3, 4, 5, 6}, 2, 3);
  std::ifstream in(dir / "g.csv");
  std::string a, b;
  std::getline(in, a);
  std::getline(in, b);
  CHECK(a == "1,2,3");
  CHECK(b == "4,5,6");
  CHECK_THROWS_AS(io::write_grid_csv(dir / "bad.csv", {1, 2, 3}, 2, 2), InvalidDimension);
  CHECK_THROWS_AS(io::read_json(dir / "g.csv"), FormatError);
}
