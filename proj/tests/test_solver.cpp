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

#include <limits>

#include "morphsep/error.hpp"
#include "morphsep/esp_frame.hpp"
#include "morphsep/fft.hpp"
#include "morphsep/frame.hpp"
#include "morphsep/solver.hpp"
#include "support.hpp"

using namespace morphsep;

namespace {

SolverConfig config(SolverMode mode, double frac, std::size_t iters, double mu = 1.0) {
  SolverConfig c;
  c.mode = mode;
  c.lambda_fraction = frac;
  c.max_iters = iters;
  c.mu = mu;
  return c;
}

Signal random_signal(std::size_t n, std::uint64_t seed) { return Signal(testing::random_cvec(n, seed), 1.0); }

}  // namespace

TEST_CASE("Two identity frames reduce BPD to one soft threshold") {
  // min l(|x1| + |x2|) + |y - x1 - x2|^2 / 2 has y1 + y2 = soft(y, l).
  const std::size_t n = 50;
  const auto id = identity_frame(n);
  const Signal y = random_signal(n, 1);
  SolverConfig c;
  c.mode = SolverMode::BPD;
  c.lambda1 = c.lambda2 = 0.8;
  c.max_iters = 2000;
  const SeparationResult r = solve_mca(y, *id, *id, c);
  const CVec expect = soft_threshold(y.samples(), 0.8);
  CHECK(testing::rel_diff((r.y1 + r.y2).vec(), expect) < 1e-9);
  CHECK(testing::rel_diff(r.y1.vec(), r.y2.vec()) < 1e-9);
}

TEST_CASE("lambda_max is the analysis sup-norm, rounded up") {
  const std::size_t n = 64;
  const Signal y = random_signal(n, 2);
  const auto i = identity_frame(n);
  const auto f = dft_frame(n);
  const double expect = std::max(norm_inf(y.samples()), norm_inf(fft::unitary_forward(y.samples())));
  const double got = lambda_max(y, *i, *f);
  CHECK(got >= expect);
  CHECK(got <= expect * (1.0 + 1e-11));
}

TEST_CASE("BPD at lambda_max returns exact zeros") {
  const std::size_t n = 128;
  const auto i = identity_frame(n);
  const auto f = dft_frame(n);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SolverConfig c = config(SolverMode::BPD, 1.0, 500);
    c.report_sparse_iterate = true;
    const SeparationResult r = solve_mca(random_signal(n, seed), *i, *f, c);
    CHECK(norm(r.u1.values) == 0.0);
    CHECK(norm(r.u2.values) == 0.0);
    CHECK(norm(r.y1.samples()) < 1e-12);
  }
}

TEST_CASE("BP stays feasible at every budget") {
  const std::size_t n = 40;
  const auto i = identity_frame(n);
  const auto f = dft_frame(n);
  const Signal y = random_signal(n, 3);
  for (std::size_t iters : {1, 10, 300}) {
    const SeparationResult r = solve_mca(y, *i, *f, config(SolverMode::BP, 0.1, iters));
    CHECK(r.relative_residual < 1e-13);
    CHECK(r.iterations_run == iters);
  }
}

TEST_CASE("BPD solution satisfies the optimality certificate") {
  const std::size_t n = 64;
  const auto i = identity_frame(n);
  const auto f = dft_frame(n);
  const Signal y = random_signal(n, 4);
  const SolverConfig c = config(SolverMode::BPD, 0.2, 20000);
  const SeparationResult r = solve_mca(y, *i, *f, c);
  const CertificateReport rep = optimality_certificate(r, y, *i, *f, c, 1e-3 * r.lambda1);
  CHECK(rep.passed);
  CHECK(rep.support1 + rep.support2 > 0);

  // A truncated run is not optimal, and the certificate says so.
  const SeparationResult early = solve_mca(y, *i, *f, config(SolverMode::BPD, 0.2, 2));
  CHECK_FALSE(optimality_certificate(early, y, *i, *f, c, 1e-6 * early.lambda1).passed);
}

TEST_CASE("The ADMM penalty changes the path, not the BPD solution") {
  const std::size_t n = 32;
  const auto i = identity_frame(n);
  const auto f = dft_frame(n);
  const Signal y = random_signal(n, 5);
  const SeparationResult a = solve_mca(y, *i, *f, config(SolverMode::BPD, 0.3, 20000, 1.0));
  const SeparationResult b = solve_mca(y, *i, *f, config(SolverMode::BPD, 0.3, 20000, 4.0));
  CHECK(testing::rel_diff(a.y1.vec(), b.y1.vec()) < 1e-6);
  CHECK(testing::rel_diff(a.y2.vec(), b.y2.vec()) < 1e-6);
}

TEST_CASE("Objective trace and early exit") {
  const std::size_t n = 32;
  const auto i = identity_frame(n);
  const auto f = dft_frame(n);
  const Signal y = random_signal(n, 6);
  SolverConfig c = config(SolverMode::BPD, 0.2, 5000);
  const SeparationResult full = solve_mca(y, *i, *f, c);
  CHECK(full.objective_trace.size() == 5000);
  CHECK(full.objective_trace.back() <= full.objective_trace.front());
  c.residual_tol = 1e-12;
  const SeparationResult stopped = solve_mca(y, *i, *f, c);
  CHECK(stopped.iterations_run < 5000);
  c.record_objective = false;
  CHECK(solve_mca(y, *i, *f, c).objective_trace.empty());
}

TEST_CASE("ESP frames inside the solver") {
  const std::size_t n = 16;
  CVec rect(n, cplx{}), decay(n);
  for (std::size_t k = 0; k < 3; ++k) rect[k] = 1.0;
  for (std::size_t k = 0; k < n; ++k) decay[k] = std::exp(-0.1 * double(k));
  const auto a1 = build_esp_frame(normalize_parseval(EnvelopeSet({rect})));
  const auto a2 = build_esp_frame(normalize_parseval(EnvelopeSet({decay})));
  const Signal y = random_signal(n, 7);
  const SolverConfig c = config(SolverMode::BPD, 0.1, 20000);
  const SeparationResult r = solve_mca(y, *a1, *a2, c);
  CHECK(r.x1.shape == std::vector<std::size_t>{1, n, n});
  CHECK(optimality_certificate(r, y, *a1, *a2, c, 1e-3 * r.lambda1).passed);
}

TEST_CASE("Solver input validation") {
  const auto i = identity_frame(8);
  const auto f = dft_frame(8);
  CHECK_THROWS_AS(solve_mca(random_signal(9, 1), *i, *f, SolverConfig{}), InvalidDimension);
  SolverConfig bad;
  bad.mu = 0.0;
  CHECK_THROWS_AS(solve_mca(random_signal(8, 1), *i, *f, bad), InvalidParameter);
  bad = SolverConfig{};
  bad.lambda_fraction = -1.0;
  CHECK_THROWS_AS(solve_mca(random_signal(8, 1), *i, *f, bad), InvalidParameter);
  bad = SolverConfig{};
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidParameter);
  CVec nan(8, cplx{});
  nan[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_mca(Signal(nan, 1.0), *i, *f, SolverConfig{}), InvalidParameter);
}

TEST_CASE("Zero input gives the zero decomposition") {
  const auto i = identity_frame(8);
  const auto f = dft_frame(8);
  const SeparationResult r = solve_mca(Signal::zeros(8, 1.0), *i, *f, config(SolverMode::BPD, 0.1, 50));
  CHECK(norm(r.y1.samples()) == 0.0);
  CHECK(norm(r.y2.samples()) == 0.0);
}

TEST_CASE("Batches match sequential solves bit for bit") {
  const std::size_t n = 48;
  const auto i = identity_frame(n);
  const auto f = dft_frame(n);
  std::vector<Signal> ys;
  for (std::uint64_t s = 0; s < 6; ++s) ys.push_back(random_signal(n, 40 + s));
  CVec nan(n, cplx{});
  nan[0] = std::numeric_limits<double>::infinity();
  ys.emplace_back(nan, 1.0);
  const SolverConfig c = config(SolverMode::BPD, 0.05, 200);
  const auto one = solve_mca_batch(ys, *i, *f, c, 1);
  const auto many = solve_mca_batch(ys, *i, *f, c, 3);
  REQUIRE(one.size() == ys.size());
  for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
    REQUIRE(one[k].ok());
    REQUIRE(many[k].ok());
    CHECK(one[k].result->y1.vec() == many[k].result->y1.vec());
    CHECK(one[k].result->y1.vec() == solve_mca(ys[k], *i, *f, c).y1.vec());
  }
  CHECK_FALSE(one.back().ok());
  CHECK_FALSE(one.back().error.empty());
  CHECK_FALSE(many.back().ok());
}

TEST_CASE("Solver configuration JSON") {
  SolverConfig c = config(SolverMode::BP, 0.01, 1234, 2.5);
  const SolverConfig back = solver_config_from_json(to_json(c));
  CHECK(back.mode == SolverMode::BP);
  CHECK(back.lambda_fraction == 0.01);
  CHECK(back.max_iters == 1234);
  CHECK(back.mu == 2.5);
  CHECK(solver_mode_from_string("bpd") == SolverMode::BPD);
  CHECK_THROWS_AS(solver_mode_from_string("lasso"), InvalidParameter);
  CHECK_THROWS_AS(solver_config_from_json(nlohmann::json::parse(R"({"mode": 3})")), FormatError);
}
