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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "morphsep/fft.hpp"
#include "morphsep/signal.hpp"

namespace morphsep {

/// Transform-domain coefficients tagged with the frame that produced them.
/// `shape` is the frame's coefficient layout (e.g. {N} or {L, N, N}) and
/// `values` is its row-major flattening.
struct CoefficientSet {
  CVec values;
  std::vector<std::size_t> shape;
  std::string frame_id;

  std::size_t size() const noexcept { return values.size(); }
};

/// Synthesis/analysis operator pair of a tight frame, A A* = p I.
///
/// synthesize is A (coefficients -> signal) and analyze is its adjoint A*
/// (signal -> coefficients). Implementations are immutable after
/// construction, so one instance can be shared between threads.
class FrameOperator {
 public:
  virtual ~FrameOperator() = default;

  virtual std::size_t signal_dim() const noexcept = 0;
  virtual std::size_t coeff_dim() const noexcept = 0;
  virtual double frame_constant() const noexcept = 0;
  virtual std::vector<std::size_t> coeff_shape() const = 0;
  virtual std::string id() const = 0;

  /// coeffs <- A* w. Spans must have signal_dim() and coeff_dim() entries.
  virtual void analyze(std::span<const cplx> w, std::span<cplx> coeffs) const = 0;
  /// w <- A coeffs.
  virtual void synthesize(std::span<const cplx> coeffs, std::span<cplx> w) const = 0;

  CoefficientSet analyze(const Signal& w) const;
  Signal synthesize(const CoefficientSet& c, double sample_rate) const;

 protected:
  void check_analyze_dims(std::span<const cplx> w, std::span<cplx> coeffs) const;
  void check_synthesize_dims(std::span<const cplx> coeffs, std::span<cplx> w) const;
};

using FramePtr = std::shared_ptr<const FrameOperator>;

/// A = I on C^N.
class IdentityFrame final : public FrameOperator {
 public:
  explicit IdentityFrame(std::size_t n);

  std::size_t signal_dim() const noexcept override { return n_; }
  std::size_t coeff_dim() const noexcept override { return n_; }
  double frame_constant() const noexcept override { return 1.0; }
  std::vector<std::size_t> coeff_shape() const override { return {n_}; }
  std::string id() const override;

  using FrameOperator::analyze;
  using FrameOperator::synthesize;
  void analyze(std::span<const cplx> w, std::span<cplx> coeffs) const override;
  void synthesize(std::span<const cplx> coeffs, std::span<cplx> w) const override;

 private:
  std::size_t n_;
};

/// Unitary DFT frame: analyze is the forward DFT scaled by 1/sqrt(N) and
/// synthesize the matching inverse, so p = 1. Any other consistent
/// normalization only rescales the regularization weights.
class DftFrame final : public FrameOperator {
 public:
  explicit DftFrame(std::size_t n);

  std::size_t signal_dim() const noexcept override { return n_; }
  std::size_t coeff_dim() const noexcept override { return n_; }
  double frame_constant() const noexcept override { return 1.0; }
  std::vector<std::size_t> coeff_shape() const override { return {n_}; }
  std::string id() const override;

  using FrameOperator::analyze;
  using FrameOperator::synthesize;
  void analyze(std::span<const cplx> w, std::span<cplx> coeffs) const override;
  void synthesize(std::span<const cplx> coeffs, std::span<cplx> w) const override;

 private:
  std::size_t n_;
  double scale_;
  fft::Plan forward_;
  fft::Plan backward_;
};

std::shared_ptr<IdentityFrame> identity_frame(std::size_t n);
std::shared_ptr<DftFrame> dft_frame(std::size_t n);

/// Complex soft threshold: ((|x| - T) / |x|) x when |x| > T, else 0.
cplx soft_threshold(cplx x, double threshold);
/// Elementwise soft threshold of `in` into `out` (may alias).
void soft_threshold(std::span<const cplx> in, double threshold, std::span<cplx> out);
CVec soft_threshold(std::span<const cplx> in, double threshold);

}  // namespace morphsep
