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
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "morphsep/signal.hpp"

namespace morphsep {

/// A mixture together with the two components it was built from, with
/// mixture[i] == short_part[i] + long_part[i] exactly.
struct Decomposition {
  Signal mixture;
  Signal short_part;
  Signal long_part;
};

/// y[n] = spike_amp * delta_{spike_index}[n] + tone_amp * sin(2 pi tone_freq n / fs).
Decomposition spike_plus_sine(std::size_t n, double sample_rate, std::size_t spike_index,
                              double tone_freq, double spike_amp = 1.0, double tone_amp = 1.0);

/// y'' + (2/tau) y' + (2 pi f0)^2 y = forcing_amplitude * sin(2 pi f t)
struct OscillatorSpec {
  double tau = 2e-3;
  double f0 = 20e3;
  double f = 15e3;
  double forcing_amplitude = 1e10;
  double sample_rate = 100e3;
  std::size_t n = 1000;

  void validate() const;
};

struct OscillatorSolution {
  Signal total;        ///< zero-state response, y(0) = y'(0) = 0
  Signal homogeneous;  ///< damped transient
  Signal particular;   ///< steady-state sinusoid
};

/// Closed-form zero-state response of the driven underdamped oscillator
/// split into its transient and steady-state parts. Throws
/// UnsupportedRegime unless 2 pi f0 > 1/tau.
OscillatorSolution driven_oscillator(const OscillatorSpec& spec);

/// A short broadband arrival: a Hann-windowed linear sweep from f_low to
/// f_high starting at `arrival` seconds and lasting `duration` seconds.
struct Arrival {
  double arrival = 1e-3;
  double duration = 0.1e-3;
  double f_low = 15e3;
  double f_high = 45e3;
  double amplitude = 1.0;
};

/// amplitude * exp(-(t - start)/decay) * sin(2 pi frequency (t - start) + phase), t >= start.
struct Resonance {
  double frequency = 20e3;
  double decay = 5e-3;
  double amplitude = 0.1;
  double start = 1e-3;
  double phase = 0.0;
};

/// Elastic-target proxy with exact ground truth: the short-duration part is
/// the pulse plus wavepackets, the long-duration part the sum of resonances.
struct SyntheticTargetSpec {
  std::optional<Arrival> pulse;
  std::vector<Arrival> wavepackets;
  std::vector<Resonance> resonances;
  double sample_rate = 100e3;
  std::size_t n = 600;
  /// Treat the record as one period of a target pinged every n / fs
  /// seconds: every component wraps around the record end, so resonance
  /// tails from the previous ping appear before the onset.
  bool periodic = false;

  void validate() const;
  /// Desk-scale default at 100 kHz over 8 ms: pulse at 1.02 ms and two
  /// wavepackets before 1.4 ms, then three resonances from 2 ms with decay
  /// constants of 1.78, 3.16 and 5.62 ms.
  static SyntheticTargetSpec desk_default();
};

Decomposition synthetic_elastic_target(const SyntheticTargetSpec& spec);

/// Real linear-FM sweep cos(2 pi (f_start t + (f_end - f_start) t^2 / (2 T))),
/// round(T fs) samples.
Signal lfm_chirp(double f_start, double f_end, double duration, double sample_rate);

/// Full linear convolution, length N_ir + N_ex - 1.
Signal convolve_response(const Signal& impulse_response, const Signal& excitation);

/// Cross-correlation with the replica, out[d] = sum_n received[n + d] conj(replica[n]),
/// same length as `received`; a replica embedded at delay d peaks at index d.
Signal matched_filter(const Signal& received, const Signal& replica);

enum class FilterType { Lowpass, Highpass, Bandpass };

/// Zero-phase Butterworth magnitude response applied in the frequency
/// domain: |H| = 1 / sqrt(1 + (nu / cutoff)^(2 order)) for a lowpass, with
/// nu the frequency as a fraction of Nyquist. Bandpass uses `cutoff` as the
/// lower and `upper_cutoff` as the upper edge.
Signal butterworth_bandlimit(const Signal& x, int order, double cutoff,
                             FilterType type = FilterType::Lowpass, double upper_cutoff = 0.0);

/// Adds white Gaussian noise at `snr_db` relative to the mean power of `x`,
/// or of `reference_power` when given. Real input gets real noise; complex
/// input gets circular complex noise. Deterministic in `seed`.
Signal add_awgn(const Signal& x, double snr_db, std::uint64_t seed,
                std::optional<double> reference_power = std::nullopt);

/// Half-open time interval [start, end) in seconds.
struct Interval {
  double start = 0.0;
  double end = 0.0;
};

struct IntervalMetrics {
  Interval i1;
  Interval i2;
  double m1 = 0.0;  ///< short-duration component error on the early interval
  double m2 = 0.0;  ///< long-duration component error on the late interval
};

/// Sample indices n with start <= time_origin + n / fs < end.
std::pair<std::size_t, std::size_t> interval_indices(const Interval& iv, double sample_rate,
                                                     std::size_t n, double time_origin = 0.0);

/// m1 = ||ref|I1 - y1|I1|| / ||ref|I1||, m2 = ||ref|I2 - y2|I2|| / ||ref|I2||,
/// where ref is `reference` when given and `y` otherwise.
IntervalMetrics interval_errors(const Signal& y, const Signal& y1, const Signal& y2,
                                const Interval& i1, const Interval& i2,
                                const Signal* reference = nullptr, double time_origin = 0.0);

/// Same intervals, but each estimate is compared with its own ground truth:
/// m1 against `short_truth` on I1 and m2 against `long_truth` on I2.
IntervalMetrics component_interval_errors(const Signal& short_truth, const Signal& long_truth,
                                          const Signal& y1, const Signal& y2, const Interval& i1,
                                          const Interval& i2, double time_origin = 0.0);

/// Default intervals for the analytic experiments (1-2 ms, 2-6 ms).
inline constexpr Interval kAnalyticEarly{1e-3, 2e-3};
inline constexpr Interval kAnalyticLate{2e-3, 6e-3};
/// Default intervals for imaging experiments (4-6 ms, 6-8 ms).
inline constexpr Interval kImagingEarly{4e-3, 6e-3};
inline constexpr Interval kImagingLate{6e-3, 8e-3};

/// LFM excitation followed by matched filtering, as applied to a target
/// impulse response.
struct LfmProcessing {
  double f_start = 15e3;
  double f_end = 45e3;
  double duration = 1e-3;
  bool butterworth = false;
  int butterworth_order = 3;
  double butterworth_cutoff = 0.25;
  /// Circular convolution and correlation over the impulse-response length,
  /// the steady state of a periodic ping. Pairs with a periodic target.
  bool circular = false;
};

struct ProcessedEcho {
  Signal clean;  ///< matched-filtered noise-free echo, length of the impulse response
  Signal noisy;  ///< same with noise added before matched filtering
};

/// Circular convolution of two equal-rate signals over `impulse_response.size()`
/// samples; the excitation may be shorter and is zero padded.
Signal circular_convolve(const Signal& impulse_response, const Signal& excitation);
/// Circular cross-correlation, out[d] = sum_n received[(n + d) mod N] conj(replica[n]).
Signal circular_matched_filter(const Signal& received, const Signal& replica);

/// Convolves `impulse_response` with the chirp, adds noise at `snr_db`
/// against the mean echo power (skipped when snr_db is not finite), matched
/// filters both, and crops to the impulse-response length.
ProcessedEcho lfm_process(const Signal& impulse_response, const LfmProcessing& proc,
                          std::optional<double> snr_db = std::nullopt, std::uint64_t seed = 0);

nlohmann::json to_json(const SyntheticTargetSpec& spec);
SyntheticTargetSpec target_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OscillatorSpec& spec);
OscillatorSpec oscillator_spec_from_json(const nlohmann::json& j);

}  // namespace morphsep
