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

#include <cmath>
#include <limits>

#include "morphsep/error.hpp"
#include "morphsep/signal.hpp"
#include "support.hpp"

using namespace morphsep;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Signal construction and arithmetic") {
  Signal a({{1, 2}, {3, -1}}, 10.0);
  Signal b({{0.5, 0}, {-1, 1}}, 10.0);
  CHECK(a.size() == 2);
  CHECK(a.duration() == 0.2);
  const Signal s = a + b;
  CHECK(s[0] == cplx{1.5, 2});
  CHECK(s[1] == cplx{2, 0});
  const Signal d = a - b;
  CHECK(d[1] == cplx{4, -2});
  CHECK((a * 2.0)[0] == cplx{2, 4});
  CHECK_FALSE(a.is_real());
  const double re[] = {1.0, -2.0};
  const Signal r = Signal::from_real(re, 5.0);
  CHECK(r.is_real());
  CHECK(r.real_part() == std::vector<double>{1.0, -2.0});
  CHECK(Signal::zeros(4, 1.0).size() == 4);
}

TEST_CASE("Signal rejects bad rates and mismatched operands") {
  CHECK_THROWS_AS(Signal({{1, 0}}, 0.0), InvalidParameter);
  CHECK_THROWS_AS(Signal({{1, 0}}, -1.0), InvalidParameter);
  CHECK_THROWS_AS(Signal({{1, 0}}, std::numeric_limits<double>::quiet_NaN()), InvalidParameter);
  Signal a({{1, 0}, {2, 0}}, 1.0);
  CHECK_THROWS_AS(a + Signal({{1, 0}}, 1.0), InvalidDimension);
  CHECK_THROWS_AS(a + Signal({{1, 0}, {1, 0}}, 2.0), InvalidParameter);
}

TEST_CASE("Vector norms and inner product") {
  const CVec v{{3, 4}, {0, -1}, {-2, 0}};
  CHECK_THAT(norm_sq(v), WithinRel(30.0, 1e-15));
  CHECK_THAT(norm(v), WithinRel(std::sqrt(30.0), 1e-15));
  CHECK_THAT(norm_l1(v), WithinRel(8.0, 1e-15));
  CHECK(norm_inf(v) == 5.0);
  const CVec w{{1, 1}, {2, 0}, {0, 1}};
  const cplx ip = inner(v, w);
  CHECK(ip == testing::dot(v, w));
  // Linear in the first argument, conjugate linear in the second.
  CVec iv = v;
  for (auto& x : iv) x *= cplx{0, 1};
  CHECK(std::abs(inner(iv, w) - cplx{0, 1} * ip) < 1e-14);
}

TEST_CASE("Relative error conventions") {
  const CVec t{{1, 0}, {0, 0}};
  const CVec e{{1.1, 0}, {0, 0}};
  CHECK_THAT(relative_error(e, t), WithinRel(0.1, 1e-12));
  const CVec z{{0, 0}, {0, 0}};
  CHECK(relative_error(z, z) == 0.0);
  CHECK(std::isinf(relative_error(t, z)));
  CHECK_THAT(relative_error(Signal(e, 1.0), Signal(t, 1.0)), WithinRel(0.1, 1e-12));
  CHECK_THROWS_AS(relative_error(Signal(e, 1.0), Signal(CVec{{1, 0}}, 1.0)), InvalidDimension);
}
