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

#include "morphsep/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "morphsep/error.hpp"

namespace morphsep {

Signal::Signal(CVec samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (samples_.empty()) throw InvalidDimension("signal must have at least one sample");
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
    throw InvalidParameter("sample rate must be positive, got " + std::to_string(sample_rate_));
}

Signal Signal::zeros(std::size_t n, double sample_rate) {
  return Signal(CVec(n, cplx{}), sample_rate);
}

Signal Signal::from_real(std::span<const double> values, double sample_rate) {
  CVec s(values.size());
  std::transform(values.begin(), values.end(), s.begin(), [](double v) { return cplx{v, 0.0}; });
  return Signal(std::move(s), sample_rate);
}

std::vector<double> Signal::real_part() const {
  std::vector<double> out(samples_.size());
  std::transform(samples_.begin(), samples_.end(), out.begin(), [](cplx c) { return c.real(); });
  return out;
}

bool Signal::is_real() const noexcept {
  return std::all_of(samples_.begin(), samples_.end(), [](cplx c) { return c.imag() == 0.0; });
}

namespace {
void require_same_shape(const Signal& a, const Signal& b) {
  if (a.size() != b.size())
    throw InvalidDimension("signal length mismatch: " + std::to_string(a.size()) + " vs " +
                           std::to_string(b.size()));
  if (a.sample_rate() != b.sample_rate())
    throw InvalidParameter("sample rate mismatch: " + std::to_string(a.sample_rate()) + " vs " +
                           std::to_string(b.sample_rate()));
}
}  // namespace

Signal& Signal::operator+=(const Signal& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
  return *this;
}

Signal& Signal::operator-=(const Signal& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
  return *this;
}

Signal& Signal::operator*=(double scale) noexcept {
  for (auto& s : samples_) s *= scale;
  return *this;
}

Signal operator+(Signal a, const Signal& b) { return a += b; }
Signal operator-(Signal a, const Signal& b) { return a -= b; }
Signal operator*(Signal a, double scale) { return a *= scale; }

double norm_sq(std::span<const cplx> v) noexcept {
  double acc = 0.0;
  for (const auto& c : v) acc += std::norm(c);
  return acc;
}

double norm(std::span<const cplx> v) noexcept { return std::sqrt(norm_sq(v)); }

double norm_l1(std::span<const cplx> v) noexcept {
  double acc = 0.0;
  for (const auto& c : v) acc += std::abs(c);
  return acc;
}

double norm_inf(std::span<const cplx> v) noexcept {
  double m = 0.0;
  // Same magnitude formula as the soft threshold, so |x| <= norm_inf(x) is exact.
  for (const auto& c : v) m = std::max(m, std::sqrt(c.real() * c.real() + c.imag() * c.imag()));
  return m;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) noexcept {
  cplx acc{};
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * std::conj(b[i]);
  return acc;
}

double relative_error(std::span<const cplx> estimate, std::span<const cplx> truth) noexcept {
  double diff = 0.0;
  const std::size_t n = std::min(estimate.size(), truth.size());
  for (std::size_t i = 0; i < n; ++i) diff += std::norm(estimate[i] - truth[i]);
  const double ref = norm_sq(truth);
  if (ref == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff / ref);
}

double relative_error(const Signal& estimate, const Signal& truth) {
  require_same_shape(estimate, truth);
  return relative_error(estimate.samples(), truth.samples());
}

}  // namespace morphsep
