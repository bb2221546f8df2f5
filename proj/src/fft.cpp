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

#include "morphsep/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>
#include <utility>

#include "morphsep/error.hpp"

namespace morphsep::fft {

namespace {

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

}  // namespace

Plan::Plan(std::size_t n, Direction dir) : n_(n) {
  if (n == 0) throw InvalidDimension("FFT length must be positive");
  CVec in(n), out(n);
  const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(in.data()), as_fftw(out.data()), sign,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan_ == nullptr) throw Error("FFTW failed to create a plan of length " + std::to_string(n));
}

Plan::~Plan() {
  if (plan_ != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

Plan::Plan(Plan&& other) noexcept
    : plan_(std::exchange(other.plan_, nullptr)), n_(std::exchange(other.n_, 0)) {}

Plan& Plan::operator=(Plan&& other) noexcept {
  if (this != &other) {
    std::swap(plan_, other.plan_);
    std::swap(n_, other.n_);
  }
  return *this;
}

void Plan::execute(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_)
    throw InvalidDimension("FFT buffer length does not match plan length " + std::to_string(n_));
  fftw_execute_dft(static_cast<fftw_plan>(plan_), as_fftw(in.data()), as_fftw(out.data()));
}

BatchPlan::BatchPlan(std::size_t n, std::size_t count, Direction dir, bool in_place)
    : n_(n), count_(count), in_place_(in_place) {
  if (n == 0 || count == 0) throw InvalidDimension("batched FFT needs positive length and count");
  CVec in(n * count), out(in_place ? 0 : n * count);
  fftw_complex* dst = in_place ? as_fftw(in.data()) : as_fftw(out.data());
  const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  const int len = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_many_dft(1, &len, static_cast<int>(count), as_fftw(in.data()), nullptr, 1, len,
                             dst, nullptr, 1, len, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan_ == nullptr) throw Error("FFTW failed to create a batched plan of length " + std::to_string(n));
}

BatchPlan::~BatchPlan() {
  if (plan_ != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

BatchPlan::BatchPlan(BatchPlan&& other) noexcept
    : plan_(std::exchange(other.plan_, nullptr)),
      n_(std::exchange(other.n_, 0)),
      count_(std::exchange(other.count_, 0)),
      in_place_(other.in_place_) {}

BatchPlan& BatchPlan::operator=(BatchPlan&& other) noexcept {
  if (this != &other) {
    std::swap(plan_, other.plan_);
    std::swap(n_, other.n_);
    std::swap(count_, other.count_);
    std::swap(in_place_, other.in_place_);
  }
  return *this;
}

void BatchPlan::execute(std::span<const cplx> in, std::span<cplx> out) const {
  const std::size_t total = n_ * count_;
  if (in.size() != total || out.size() != total)
    throw InvalidDimension("batched FFT buffer does not match plan shape");
  if (in_place_ != (in.data() == out.data()))
    throw InvalidParameter(in_place_ ? "in-place FFT plan given distinct buffers"
                                     : "out-of-place FFT plan given aliased buffers");
  fftw_execute_dft(static_cast<fftw_plan>(plan_), as_fftw(in.data()), as_fftw(out.data()));
}

CVec forward(std::span<const cplx> x) {
  CVec out(x.size());
  Plan(x.size(), Direction::Forward).execute(x, out);
  return out;
}

CVec backward(std::span<const cplx> x) {
  CVec out(x.size());
  Plan(x.size(), Direction::Backward).execute(x, out);
  return out;
}

CVec unitary_forward(std::span<const cplx> x) {
  CVec out = forward(x);
  const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (auto& v : out) v *= s;
  return out;
}

CVec unitary_backward(std::span<const cplx> x) {
  CVec out = backward(x);
  const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (auto& v : out) v *= s;
  return out;
}

CVec forward_2d(std::span<const cplx> x, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || x.size() != rows * cols)
    throw InvalidDimension("2-D FFT shape does not match buffer length");
  CVec in(x.begin(), x.end());
  CVec out(x.size());
  fftw_plan p;
  {
    std::lock_guard lock(planner_mutex());
    p = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), as_fftw(in.data()),
                         as_fftw(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(p);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
  return out;
}

}  // namespace morphsep::fft
