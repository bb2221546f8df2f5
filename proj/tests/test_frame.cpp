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

#include "morphsep/error.hpp"
#include "morphsep/frame.hpp"
#include "support.hpp"

using namespace morphsep;

namespace {

// <A c, w> == <c, A* w> and A A* w == p w for one frame.
void check_tight_and_adjoint(const FrameOperator& a, std::uint64_t seed) {
  const CVec w = testing::random_cvec(a.signal_dim(), seed);
  const CVec c = testing::random_cvec(a.coeff_dim(), seed + 1);
  CVec ac(a.signal_dim()), aw(a.coeff_dim()), aaw(a.signal_dim());
  a.synthesize(c, ac);
  a.analyze(w, aw);
  const cplx lhs = testing::dot(ac, w), rhs = testing::dot(c, aw);
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));
  a.synthesize(aw, aaw);
  CVec pw = w;
  for (auto& x : pw) x *= a.frame_constant();
  CHECK(testing::rel_diff(aaw, pw) < 1e-12);
}

}  // namespace

TEST_CASE("Identity and DFT frames are Parseval") {
  for (std::size_t n : {1, 5, 64, 1000}) {
    check_tight_and_adjoint(*identity_frame(n), n);
    check_tight_and_adjoint(*dft_frame(n), n + 7);
  }
}

TEST_CASE("DFT frame analysis is the unitary DFT") {
  const std::size_t n = 12;
  const CVec w = testing::random_cvec(n, 2);
  CVec c(n);
  dft_frame(n)->analyze(w, c);
  CVec ref = testing::naive_dft(w, -1);
  for (auto& x : ref) x /= std::sqrt(double(n));
  CHECK(testing::rel_diff(c, ref) < 1e-13);
}

TEST_CASE("Coefficient sets carry the frame identity") {
  const auto f = dft_frame(8);
  const Signal s(testing::random_cvec(8, 4), 1.0);
  const CoefficientSet c = f->analyze(s);
  CHECK(c.shape == std::vector<std::size_t>{8});
  CHECK(c.frame_id == f->id());
  CHECK(testing::rel_diff(f->synthesize(c, 1.0).vec(), s.vec()) < 1e-14);
  CoefficientSet wrong = c;
  wrong.frame_id = identity_frame(8)->id();
  CHECK_THROWS_AS(f->synthesize(wrong, 1.0), InvalidDimension);
  CHECK_THROWS_AS(f->analyze(Signal(CVec(9), 1.0)), InvalidDimension);
}

TEST_CASE("Soft threshold is the l1 proximal map") {
  CHECK(std::abs(soft_threshold(cplx{3, 4}, 1.0) - cplx{2.4, 3.2}) < 1e-15);
  CHECK(soft_threshold(cplx{3, 4}, 5.0) == cplx{});
  CHECK(soft_threshold(cplx{0.1, 0}, 0.2) == cplx{});
  CHECK(soft_threshold(cplx{-2, 0}, 0.0) == cplx{-2, 0});
  CHECK_THROWS_AS(soft_threshold(cplx{1, 0}, -1.0), InvalidParameter);

  // Property: prox output z minimizes t|z| + |z - x|^2 / 2, checked against
  // random perturbations; and the map is nonexpansive.
  const CVec x = testing::random_cvec(200, 9);
  const CVec y = testing::random_cvec(200, 10);
  const double t = 0.7;
  const CVec zx = soft_threshold(x, t), zy = soft_threshold(y, t);
  double dz = 0.0, dxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dz += std::norm(zx[i] - zy[i]);
    dxy += std::norm(x[i] - y[i]);
    CHECK(std::abs(zx[i]) <= std::abs(x[i]));
    const auto cost = [&](cplx z) { return t * std::abs(z) + 0.5 * std::norm(z - x[i]); };
    for (cplx dlt : {cplx{1e-3, 0}, cplx{0, 1e-3}, cplx{-1e-3, 0}, cplx{0, -1e-3}})
      CHECK(cost(zx[i]) <= cost(zx[i] + dlt) + 1e-15);
  }
  CHECK(dz <= dxy);

  CVec inplace = x;
  soft_threshold(inplace, t, inplace);
  CHECK(inplace == zx);
}
