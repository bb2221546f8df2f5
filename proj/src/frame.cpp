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

#include "morphsep/frame.hpp"

#include <algorithm>
#include <cmath>

#include "morphsep/error.hpp"

namespace morphsep {

CoefficientSet FrameOperator::analyze(const Signal& w) const {
  CoefficientSet c{CVec(coeff_dim()), coeff_shape(), id()};
  analyze(w.samples(), c.values);
  return c;
}

Signal FrameOperator::synthesize(const CoefficientSet& c, double sample_rate) const {
  if (c.shape != coeff_shape())
    throw InvalidDimension("coefficient shape does not match frame " + id());
  if (!c.frame_id.empty() && c.frame_id != id())
    throw InvalidDimension("coefficients come from frame " + c.frame_id + ", not " + id());
  Signal w = Signal::zeros(signal_dim(), sample_rate);
  synthesize(c.values, w.samples());
  return w;
}

void FrameOperator::check_analyze_dims(std::span<const cplx> w, std::span<cplx> coeffs) const {
  if (w.size() != signal_dim())
    throw InvalidDimension("analyze: signal has " + std::to_string(w.size()) +
                           " samples, frame expects " + std::to_string(signal_dim()));
  if (coeffs.size() != coeff_dim())
    throw InvalidDimension("analyze: coefficient buffer has wrong size for frame " + id());
}

void FrameOperator::check_synthesize_dims(std::span<const cplx> coeffs, std::span<cplx> w) const {
  if (coeffs.size() != coeff_dim())
    throw InvalidDimension("synthesize: coefficient buffer has " + std::to_string(coeffs.size()) +
                           " entries, frame " + id() + " expects " + std::to_string(coeff_dim()));
  if (w.size() != signal_dim())
    throw InvalidDimension("synthesize: signal buffer has wrong size for frame " + id());
}

IdentityFrame::IdentityFrame(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidDimension("identity frame needs N >= 1");
}

std::string IdentityFrame::id() const { return "identity:" + std::to_string(n_); }

void IdentityFrame::analyze(std::span<const cplx> w, std::span<cplx> coeffs) const {
  check_analyze_dims(w, coeffs);
  std::copy(w.begin(), w.end(), coeffs.begin());
}

void IdentityFrame::synthesize(std::span<const cplx> coeffs, std::span<cplx> w) const {
  check_synthesize_dims(coeffs, w);
  std::copy(coeffs.begin(), coeffs.end(), w.begin());
}

namespace {
std::size_t checked_dft_size(std::size_t n) {
  if (n == 0) throw InvalidDimension("DFT frame needs N >= 1");
  return n;
}
}  // namespace

DftFrame::DftFrame(std::size_t n)
    : n_(checked_dft_size(n)),
      scale_(1.0 / std::sqrt(static_cast<double>(n))),
      forward_(n, fft::Direction::Forward),
      backward_(n, fft::Direction::Backward) {}

std::string DftFrame::id() const { return "dft:" + std::to_string(n_); }

void DftFrame::analyze(std::span<const cplx> w, std::span<cplx> coeffs) const {
  check_analyze_dims(w, coeffs);
  if (w.data() == coeffs.data()) {
    CVec tmp(w.begin(), w.end());
    forward_.execute(tmp, coeffs);
  } else {
    forward_.execute(w, coeffs);
  }
  for (auto& c : coeffs) c *= scale_;
}

void DftFrame::synthesize(std::span<const cplx> coeffs, std::span<cplx> w) const {
  check_synthesize_dims(coeffs, w);
  if (w.data() == coeffs.data()) {
    CVec tmp(coeffs.begin(), coeffs.end());
    backward_.execute(tmp, w);
  } else {
    backward_.execute(coeffs, w);
  }
  for (auto& v : w) v *= scale_;
}

std::shared_ptr<IdentityFrame> identity_frame(std::size_t n) {
  return std::make_shared<IdentityFrame>(n);
}

std::shared_ptr<DftFrame> dft_frame(std::size_t n) { return std::make_shared<DftFrame>(n); }

cplx soft_threshold(cplx x, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidParameter("soft threshold must be nonnegative");
  const double mag = std::sqrt(x.real() * x.real() + x.imag() * x.imag());
  if (mag <= threshold) return {};
  return x * ((mag - threshold) / mag);
}

void soft_threshold(std::span<const cplx> in, double threshold, std::span<cplx> out) {
  if (!(threshold >= 0.0)) throw InvalidParameter("soft threshold must be nonnegative");
  if (in.size() != out.size()) throw InvalidDimension("soft threshold: size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double mag = std::sqrt(in[i].real() * in[i].real() + in[i].imag() * in[i].imag());
    out[i] = mag <= threshold ? cplx{} : in[i] * ((mag - threshold) / mag);
  }
}

CVec soft_threshold(std::span<const cplx> in, double threshold) {
  CVec out(in.size());
  soft_threshold(in, threshold, out);
  return out;
}

}  // namespace morphsep
