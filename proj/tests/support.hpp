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

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "morphsep/signal.hpp"

namespace testing {

using morphsep::cplx;
using morphsep::CVec;

inline constexpr double kPi = 3.14159265358979323846;

inline CVec random_cvec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVec v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

inline std::vector<double> random_real(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

/// Textbook O(N^2) DFT, sign -1 for forward.
inline CVec naive_dft(const CVec& x, int sign = -1) {
  const std::size_t n = x.size();
  CVec out(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx acc{};
    for (std::size_t m = 0; m < n; ++m)
      acc += x[m] * std::polar(1.0, sign * 2.0 * kPi * static_cast<double>((j * m) % n) / static_cast<double>(n));
    out[j] = acc;
  }
  return out;
}

inline double rel_diff(const CVec& a, const CVec& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

inline cplx dot(const CVec& a, const CVec& b) {
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc;
}

}  // namespace testing
