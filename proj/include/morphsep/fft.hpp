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

#include <cstddef>
#include <span>

#include "morphsep/signal.hpp"

namespace morphsep::fft {

enum class Direction { Forward, Backward };

/// Unnormalized 1-D complex DFT of a fixed length, backed by FFTW.
///
/// Forward computes X[j] = sum_n x[n] exp(-2 pi i j n / N); Backward uses the
/// conjugate kernel and does not divide by N. Plans are created once with
/// FFTW_ESTIMATE so repeated executions are bitwise reproducible, and
/// execute() is safe to call concurrently on one plan.
class Plan {
 public:
  Plan(std::size_t n, Direction dir);
  ~Plan();
  Plan(Plan&& other) noexcept;
  Plan& operator=(Plan&& other) noexcept;
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  std::size_t size() const noexcept { return n_; }
  /// Out-of-place transform; `in` and `out` must not overlap.
  void execute(std::span<const cplx> in, std::span<cplx> out) const;

 private:
  void* plan_ = nullptr;
  std::size_t n_ = 0;
};

/// A batch of `count` contiguous length-n transforms, rows laid out back to
/// back. Used by the ESP frame, where one signal expands into L*N rows.
class BatchPlan {
 public:
  BatchPlan(std::size_t n, std::size_t count, Direction dir, bool in_place);
  ~BatchPlan();
  BatchPlan(BatchPlan&& other) noexcept;
  BatchPlan& operator=(BatchPlan&& other) noexcept;
  BatchPlan(const BatchPlan&) = delete;
  BatchPlan& operator=(const BatchPlan&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t count() const noexcept { return count_; }
  /// For an in-place plan `in` and `out` must be the same buffer.
  void execute(std::span<const cplx> in, std::span<cplx> out) const;

 private:
  void* plan_ = nullptr;
  std::size_t n_ = 0;
  std::size_t count_ = 0;
  bool in_place_ = false;
};

// Convenience one-shot transforms. They build a plan per call, so hot loops
// should hold a Plan instead.
CVec forward(std::span<const cplx> x);
CVec backward(std::span<const cplx> x);
/// Unitary forward DFT (scaled by 1/sqrt(N)).
CVec unitary_forward(std::span<const cplx> x);
CVec unitary_backward(std::span<const cplx> x);

/// 2-D unnormalized forward DFT of a row-major rows x cols array.
CVec forward_2d(std::span<const cplx> x, std::size_t rows, std::size_t cols);

}  // namespace morphsep::fft
