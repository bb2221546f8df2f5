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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace morphsep {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// A sampled time series. Samples are always complex; real data carries
/// zero imaginary parts.
class Signal {
 public:
  Signal(CVec samples, double sample_rate);
  static Signal zeros(std::size_t n, double sample_rate);
  static Signal from_real(std::span<const double> values, double sample_rate);

  std::size_t size() const noexcept { return samples_.size(); }
  double sample_rate() const noexcept { return sample_rate_; }
  double duration() const noexcept { return static_cast<double>(size()) / sample_rate_; }

  std::span<const cplx> samples() const noexcept { return samples_; }
  std::span<cplx> samples() noexcept { return samples_; }
  const CVec& vec() const noexcept { return samples_; }

  cplx operator[](std::size_t i) const { return samples_[i]; }
  cplx& operator[](std::size_t i) { return samples_[i]; }

  std::vector<double> real_part() const;
  /// True when every imaginary part is exactly zero.
  bool is_real() const noexcept;

  Signal& operator+=(const Signal& other);
  Signal& operator-=(const Signal& other);
  Signal& operator*=(double scale) noexcept;

 private:
  CVec samples_;
  double sample_rate_;
};

Signal operator+(Signal a, const Signal& b);
Signal operator-(Signal a, const Signal& b);
Signal operator*(Signal a, double scale);

// Vector helpers shared by every module.
double norm(std::span<const cplx> v) noexcept;
double norm_sq(std::span<const cplx> v) noexcept;
double norm_l1(std::span<const cplx> v) noexcept;
double norm_inf(std::span<const cplx> v) noexcept;
/// <a, b> = sum a[i] * conj(b[i]); linear in the first argument.
cplx inner(std::span<const cplx> a, std::span<const cplx> b) noexcept;
/// ||estimate - truth|| / ||truth||. A zero truth gives 0 for a zero
/// estimate and +inf otherwise.
double relative_error(std::span<const cplx> estimate, std::span<const cplx> truth) noexcept;
double relative_error(const Signal& estimate, const Signal& truth);

}  // namespace morphsep
