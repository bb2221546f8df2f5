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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "morphsep/fft.hpp"
#include "morphsep/frame.hpp"
#include "morphsep/signal.hpp"

namespace morphsep {

/// L nonzero envelopes of common length N.
class EnvelopeSet {
 public:
  EnvelopeSet(std::vector<CVec> envelopes, std::vector<std::string> labels = {});

  std::size_t length() const noexcept { return n_; }
  std::size_t count() const noexcept { return envelopes_.size(); }
  const std::vector<CVec>& envelopes() const noexcept { return envelopes_; }
  const CVec& operator[](std::size_t l) const { return envelopes_[l]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// N * sum_l ||e_l||^2, the frame bound of the generated frame.
  double frame_bound() const noexcept;

 private:
  std::vector<CVec> envelopes_;
  std::vector<std::string> labels_;
  std::size_t n_ = 0;
};

/// e_l[n] = 1 for 0 <= n < round(T_l * fs), 0 elsewhere. Sample counts are
/// rounded half away from zero.
EnvelopeSet make_rectangular_envelopes(std::span<const double> durations, double sample_rate,
                                       std::size_t n);
/// e_l[n] = exp(-n / (tau_l * fs)).
EnvelopeSet make_exponential_envelopes(std::span<const double> time_constants,
                                       double sample_rate, std::size_t n);
/// Concatenates two sets (same N).
EnvelopeSet concat(const EnvelopeSet& a, const EnvelopeSet& b);
/// Rescales every envelope to ||e_l|| = (N L)^(-1/2), giving a Parseval frame.
EnvelopeSet normalize_parseval(const EnvelopeSet& env);

// Elementary operators on C^N used to factor the frame vectors:
// a_{l,k,m} = S^m D(e_l) s_k.
namespace esp_ops {
/// (S^shift w)[n] = w[n - shift mod N]; negative shifts are allowed.
CVec shift(std::span<const cplx> w, long long shift);
/// (D(v) w)[n] = v[n] w[n].
CVec diag(std::span<const cplx> v, std::span<const cplx> w);
/// (H w)[n] = conj(w[N - n mod N]).
CVec conj_flip(std::span<const cplx> w);
}  // namespace esp_ops

struct EspOptions {
  /// Upper bound on L * N * N coefficients a frame may allocate.
  std::size_t max_coefficients = std::size_t{1} << 28;
};

/// Enveloped sinusoid frame: every cyclic shift m and modulation k of every
/// envelope e_l,
///
///   a_{l,k,m}[n] = e_l[(n - m) mod N] exp(2 pi j k (n - m) / N),
///
/// which is tight with frame_constant() = N sum_l ||e_l||^2.
///
/// Coefficients are laid out as (l, k, m) row-major, so each c_{k,l} is a
/// contiguous run of N shifts. Analysis and synthesis run in
/// O(L N^2 log N) through the DFT: shifting by k in frequency is an index
/// rotation of the cached envelope spectra, so the dense N x (L N^2) matrix is
/// never formed. synthesize() is the plain adjoint partner A with no 1/p
/// factor; analyze_dense()/synthesize_dense() evaluate the definition
/// directly and exist as a reference for small N.
class EspFrame final : public FrameOperator {
 public:
  explicit EspFrame(EnvelopeSet envelopes, EspOptions options = {});

  std::size_t signal_dim() const noexcept override { return n_; }
  std::size_t coeff_dim() const noexcept override { return l_ * n_ * n_; }
  double frame_constant() const noexcept override { return frame_constant_; }
  std::vector<std::size_t> coeff_shape() const override { return {l_, n_, n_}; }
  std::string id() const override;

  std::size_t envelope_count() const noexcept { return l_; }
  const EnvelopeSet& envelopes() const noexcept { return envelopes_; }
  std::size_t index(std::size_t l, std::size_t k, std::size_t m) const noexcept {
    return (l * n_ + k) * n_ + m;
  }

  using FrameOperator::analyze;
  using FrameOperator::synthesize;
  void analyze(std::span<const cplx> w, std::span<cplx> coeffs) const override;
  void synthesize(std::span<const cplx> coeffs, std::span<cplx> w) const override;

  /// Frame vector a_{l,k,m}.
  CVec atom(std::size_t l, std::size_t k, std::size_t m) const;
  void analyze_dense(std::span<const cplx> w, std::span<cplx> coeffs) const;
  void synthesize_dense(std::span<const cplx> coeffs, std::span<cplx> w) const;

 private:
  EnvelopeSet envelopes_;
  std::size_t n_;
  std::size_t l_;
  double frame_constant_;
  // F e_l scaled by 1/N, and F H e_l = conj(F e_l) scaled by 1/N.
  std::vector<CVec> spectra_;
  std::vector<CVec> flip_spectra_;
  fft::Plan forward_;
  fft::Plan backward_;
  // Rows (l, k) are transformed in fixed blocks of block_rows_; the last
  // block may be shorter and gets its own plans.
  std::size_t block_rows_;
  std::size_t tail_rows_;
  fft::BatchPlan block_backward_;  // in place
  fft::BatchPlan block_forward_;   // out of place
  std::optional<fft::BatchPlan> tail_backward_;
  std::optional<fft::BatchPlan> tail_forward_;
};

std::shared_ptr<EspFrame> build_esp_frame(EnvelopeSet envelopes, EspOptions options = {});

CoefficientSet esp_analyze(const EspFrame& frame, const Signal& w);
Signal esp_synthesize(const EspFrame& frame, const CoefficientSet& c, double sample_rate);

// JSON description of an envelope set:
//   {"N": 600, "sample_rate": 1e5, "normalize": true,
//    "envelopes": [{"kind": "rectangular", "param": 2.7e-4},
//                  {"kind": "exponential", "param": 1.78e-3},
//                  {"kind": "raw", "samples": [1.0, [0.5, -0.5], ...]}]}
// `param` is in seconds. Raw samples are reals or [re, im] pairs. "N" and
// "sample_rate" may be omitted and supplied by the caller.
enum class EnvelopeKind { Rectangular, Exponential, Raw };

struct EnvelopeEntry {
  EnvelopeKind kind = EnvelopeKind::Raw;
  double param = 0.0;
  CVec samples;
};

struct EnvelopeConfig {
  std::size_t n = 0;
  double sample_rate = 0.0;
  bool normalize = true;
  std::vector<EnvelopeEntry> entries;
};

EnvelopeConfig envelope_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EnvelopeConfig& cfg);
/// Builds the set; `n` and `sample_rate` fill in fields left at zero.
EnvelopeSet build_envelopes(const EnvelopeConfig& cfg, std::size_t n = 0, double sample_rate = 0.0);
/// Describes an existing set as raw samples.
EnvelopeConfig describe_envelopes(const EnvelopeSet& env, double sample_rate);

}  // namespace morphsep
