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

#include "morphsep/signal_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "morphsep/error.hpp"
#include "morphsep/fft.hpp"

namespace morphsep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_rate(const Signal& a, const Signal& b, const char* what) {
  const double ra = a.sample_rate(), rb = b.sample_rate();
  if (std::abs(ra - rb) > 1e-12 * std::max(ra, rb))
    throw InvalidParameter(std::string(what) + ": sample rates differ (" + std::to_string(ra) +
                           " vs " + std::to_string(rb) + ")");
}

}  // namespace

Decomposition spike_plus_sine(std::size_t n, double sample_rate, std::size_t spike_index,
                              double tone_freq, double spike_amp, double tone_amp) {
  if (n == 0) throw InvalidDimension("spike_plus_sine: N must be positive");
  if (!(sample_rate > 0.0)) throw InvalidParameter("spike_plus_sine: sample rate must be positive");
  if (spike_index >= n) throw InvalidParameter("spike_plus_sine: spike index out of range");
  if (!(tone_freq > 0.0) || !(tone_freq < sample_rate / 2.0))
    throw InvalidParameter("spike_plus_sine: tone frequency must lie in (0, fs/2)");
  Signal spike = Signal::zeros(n, sample_rate);
  spike[spike_index] = spike_amp;
  Signal tone = Signal::zeros(n, sample_rate);
  for (std::size_t i = 0; i < n; ++i)
    tone[i] = tone_amp * std::sin(kTwoPi * tone_freq * static_cast<double>(i) / sample_rate);
  Signal mix = Signal::zeros(n, sample_rate);
  for (std::size_t i = 0; i < n; ++i) mix[i] = spike[i] + tone[i];
  return {std::move(mix), std::move(spike), std::move(tone)};
}

void OscillatorSpec::validate() const {
  if (!(tau > 0.0) || !(f0 > 0.0) || !(f > 0.0))
    throw InvalidParameter("oscillator: tau, f0 and f must be positive");
  if (!(sample_rate > 0.0) || n == 0)
    throw InvalidParameter("oscillator: sample rate and N must be positive");
  if (!(kTwoPi * f0 > 1.0 / tau))
    throw UnsupportedRegime("oscillator is not underdamped (needs 2 pi f0 > 1 / tau)");
}

OscillatorSolution driven_oscillator(const OscillatorSpec& spec) {
  spec.validate();
  const double w = kTwoPi * spec.f;
  const double w0 = kTwoPi * spec.f0;
  const double sigma = 1.0 / spec.tau;
  const double gamma = 2.0 * sigma;
  const double wd = std::sqrt(w0 * w0 - sigma * sigma);

  // Steady state A sin(wt) + B cos(wt).
  const double detune = w0 * w0 - w * w;
  const double denom = detune * detune + gamma * gamma * w * w;
  const double a = spec.forcing_amplitude * detune / denom;
  const double b = -spec.forcing_amplitude * gamma * w / denom;
  // Transient exp(-sigma t) (C cos(wd t) + E sin(wd t)) cancelling y(0), y'(0).
  const double c = -b;
  const double e = (sigma * c - a * w) / wd;

  Signal hom = Signal::zeros(spec.n, spec.sample_rate);
  Signal par = Signal::zeros(spec.n, spec.sample_rate);
  Signal total = Signal::zeros(spec.n, spec.sample_rate);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate;
    par[i] = a * std::sin(w * t) + b * std::cos(w * t);
    hom[i] = std::exp(-sigma * t) * (c * std::cos(wd * t) + e * std::sin(wd * t));
    total[i] = hom[i] + par[i];
  }
  return {std::move(total), std::move(hom), std::move(par)};
}

namespace {

// Time since `onset` for sample i; with `period` > 0 the clock wraps.
double elapsed(std::size_t i, double fs, double onset, double period) {
  const double tau = static_cast<double>(i) / fs - onset;
  if (period > 0.0 && tau < 0.0) return tau + period;
  return tau;
}

void add_arrival(Signal& s, const Arrival& a, double period) {
  const double fs = s.sample_rate();
  const double sweep = (a.f_high - a.f_low) / (2.0 * a.duration);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double tau = elapsed(i, fs, a.arrival, period);
    if (tau < 0.0 || tau >= a.duration) continue;
    const double window = 0.5 * (1.0 - std::cos(kTwoPi * tau / a.duration));
    s[i] += a.amplitude * window * std::sin(kTwoPi * (a.f_low * tau + sweep * tau * tau));
  }
}

void add_resonance(Signal& s, const Resonance& r, double period) {
  const double fs = s.sample_rate();
  for (std::size_t i = 0; i < s.size(); ++i) {
    double tau = elapsed(i, fs, r.start, period);
    if (tau < 0.0) continue;
    double v = 0.0;
    // Periodic pinging sums the tails of every earlier ping.
    do {
      v += std::exp(-tau / r.decay) * std::sin(kTwoPi * r.frequency * tau + r.phase);
      tau += period;
    } while (period > 0.0 && tau < 40.0 * r.decay);
    s[i] += r.amplitude * v;
  }
}

void validate_arrival(const Arrival& a, double duration, double nyquist) {
  if (!(a.arrival >= 0.0) || !(a.arrival < duration))
    throw InvalidParameter("arrival time outside the signal");
  if (!(a.duration > 0.0)) throw InvalidParameter("arrival duration must be positive");
  if (a.f_low < 0.0 || a.f_high > nyquist) throw InvalidParameter("arrival band exceeds Nyquist");
}

}  // namespace

void SyntheticTargetSpec::validate() const {
  if (!(sample_rate > 0.0) || n == 0)
    throw InvalidParameter("target: sample rate and N must be positive");
  const double dur = static_cast<double>(n) / sample_rate;
  const double nyq = sample_rate / 2.0;
  if (pulse) validate_arrival(*pulse, dur, nyq);
  for (const auto& w : wavepackets) validate_arrival(w, dur, nyq);
  for (const auto& r : resonances) {
    if (!(r.decay > 0.0)) throw InvalidParameter("resonance decay constant must be positive");
    if (!(r.start >= 0.0) || !(r.start < dur)) throw InvalidParameter("resonance start outside the signal");
    if (!(r.frequency > 0.0) || r.frequency >= nyq)
      throw InvalidParameter("resonance frequency must lie in (0, fs/2)");
  }
}

SyntheticTargetSpec SyntheticTargetSpec::desk_default() {
  SyntheticTargetSpec s;
  s.sample_rate = 100e3;
  s.n = 800;
  s.pulse = Arrival{1.02e-3, 0.1e-3, 15e3, 45e3, 1.5};
  s.wavepackets = {Arrival{1.12e-3, 0.08e-3, 20e3, 40e3, 0.75},
                   Arrival{1.25e-3, 0.08e-3, 20e3, 40e3, 0.45}};
  // Ringing starts once the specular and surface returns have passed. After
  // LFM processing the late time sits about 20 dB below the early time.
  s.resonances = {Resonance{18e3, 1.78e-3, 0.016, 2.0e-3, 0.0},
                  Resonance{28e3, 3.16e-3, 0.012, 2.05e-3, 0.0},
                  Resonance{39e3, 5.62e-3, 0.012, 2.0e-3, 0.0}};
  return s;
}

Decomposition synthetic_elastic_target(const SyntheticTargetSpec& spec) {
  spec.validate();
  Signal short_part = Signal::zeros(spec.n, spec.sample_rate);
  Signal long_part = Signal::zeros(spec.n, spec.sample_rate);
  const double period = spec.periodic ? static_cast<double>(spec.n) / spec.sample_rate : 0.0;
  if (spec.pulse) add_arrival(short_part, *spec.pulse, period);
  for (const auto& w : spec.wavepackets) add_arrival(short_part, w, period);
  for (const auto& r : spec.resonances) add_resonance(long_part, r, period);
  Signal mix = Signal::zeros(spec.n, spec.sample_rate);
  for (std::size_t i = 0; i < spec.n; ++i) mix[i] = short_part[i] + long_part[i];
  return {std::move(mix), std::move(short_part), std::move(long_part)};
}

Signal lfm_chirp(double f_start, double f_end, double duration, double sample_rate) {
  if (!(duration > 0.0)) throw InvalidParameter("chirp duration must be positive");
  if (!(sample_rate > 0.0)) throw InvalidParameter("sample rate must be positive");
  const double nyq = sample_rate / 2.0;
  if (f_start < 0.0 || f_end < 0.0 || f_start > nyq || f_end > nyq)
    throw InvalidParameter("chirp band exceeds the Nyquist frequency");
  const auto n = static_cast<std::size_t>(std::round(duration * sample_rate));
  if (n == 0) throw InvalidParameter("chirp shorter than one sample");
  const double sweep = (f_end - f_start) / (2.0 * duration);
  Signal s = Signal::zeros(n, sample_rate);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    s[i] = std::cos(kTwoPi * (f_start * t + sweep * t * t));
  }
  return s;
}

namespace {

// Linear convolution through a zero-padded DFT of length `len`.
CVec fft_convolve(std::span<const cplx> a, std::span<const cplx> b, std::size_t len, bool conj_b_reversed) {
  CVec pa(len, cplx{}), pb(len, cplx{});
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  fft::Plan fwd(len, fft::Direction::Forward), bwd(len, fft::Direction::Backward);
  CVec fa(len), fb(len), out(len);
  fwd.execute(pa, fa);
  fwd.execute(pb, fb);
  const double inv = 1.0 / static_cast<double>(len);
  for (std::size_t j = 0; j < len; ++j) fa[j] *= (conj_b_reversed ? std::conj(fb[j]) : fb[j]) * inv;
  bwd.execute(fa, out);
  return out;
}

Signal keep_real_if(bool real, CVec v, double fs) {
  if (real)
    for (auto& x : v) x = {x.real(), 0.0};
  return Signal(std::move(v), fs);
}

}  // namespace

Signal convolve_response(const Signal& impulse_response, const Signal& excitation) {
  require_same_rate(impulse_response, excitation, "convolve_response");
  const std::size_t len = impulse_response.size() + excitation.size() - 1;
  CVec out = fft_convolve(impulse_response.samples(), excitation.samples(), len, false);
  return keep_real_if(impulse_response.is_real() && excitation.is_real(), std::move(out),
                      impulse_response.sample_rate());
}

Signal matched_filter(const Signal& received, const Signal& replica) {
  require_same_rate(received, replica, "matched_filter");
  const std::size_t len = received.size() + replica.size() - 1;
  // Circular correlation of the padded sequences: non-negative lags occupy
  // indices 0 .. len - replica.size(), untouched by wrap-around.
  CVec corr = fft_convolve(received.samples(), replica.samples(), len, true);
  corr.resize(received.size());
  return keep_real_if(received.is_real() && replica.is_real(), std::move(corr),
                      received.sample_rate());
}

Signal circular_convolve(const Signal& impulse_response, const Signal& excitation) {
  require_same_rate(impulse_response, excitation, "circular_convolve");
  const std::size_t n = impulse_response.size();
  if (excitation.size() > n) throw InvalidDimension("circular_convolve: excitation longer than the period");
  CVec out = fft_convolve(impulse_response.samples(), excitation.samples(), n, false);
  return keep_real_if(impulse_response.is_real() && excitation.is_real(), std::move(out),
                      impulse_response.sample_rate());
}

Signal circular_matched_filter(const Signal& received, const Signal& replica) {
  require_same_rate(received, replica, "circular_matched_filter");
  const std::size_t n = received.size();
  if (replica.size() > n) throw InvalidDimension("circular_matched_filter: replica longer than the period");
  CVec out = fft_convolve(received.samples(), replica.samples(), n, true);
  return keep_real_if(received.is_real() && replica.is_real(), std::move(out), received.sample_rate());
}

Signal butterworth_bandlimit(const Signal& x, int order, double cutoff, FilterType type,
                             double upper_cutoff) {
  if (order < 1) throw InvalidParameter("Butterworth order must be at least 1");
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw InvalidParameter("Butterworth cutoff must lie in (0, 1)");
  if (type == FilterType::Bandpass && !(upper_cutoff > cutoff && upper_cutoff < 1.0))
    throw InvalidParameter("bandpass upper cutoff must lie in (cutoff, 1)");
  const std::size_t n = x.size();
  CVec spec = fft::forward(x.samples());
  const double two_n = 2.0 * order;
  auto lowpass = [&](double nu, double c) { return 1.0 / std::sqrt(1.0 + std::pow(nu / c, two_n)); };
  auto highpass = [&](double nu, double c) {
    return nu == 0.0 ? 0.0 : 1.0 / std::sqrt(1.0 + std::pow(c / nu, two_n));
  };
  for (std::size_t j = 0; j < n; ++j) {
    const double bin = static_cast<double>(j <= n / 2 ? j : n - j);
    const double nu = 2.0 * bin / static_cast<double>(n);  // fraction of Nyquist
    double h = 1.0;
    switch (type) {
      case FilterType::Lowpass: h = lowpass(nu, cutoff); break;
      case FilterType::Highpass: h = highpass(nu, cutoff); break;
      case FilterType::Bandpass: h = highpass(nu, cutoff) * lowpass(nu, upper_cutoff); break;
    }
    spec[j] *= h / static_cast<double>(n);
  }
  return keep_real_if(x.is_real(), fft::backward(spec), x.sample_rate());
}

Signal add_awgn(const Signal& x, double snr_db, std::uint64_t seed,
                std::optional<double> reference_power) {
  const double power = reference_power ? *reference_power
                                       : norm_sq(x.samples()) / static_cast<double>(x.size());
  if (!(power > 0.0)) throw InvalidParameter("add_awgn: signal power is zero, SNR undefined");
  if (!std::isfinite(snr_db)) throw InvalidParameter("add_awgn: SNR must be finite");
  const double noise_power = power / std::pow(10.0, snr_db / 10.0);
  std::mt19937_64 rng(seed);
  Signal out = x;
  if (x.is_real()) {
    std::normal_distribution<double> g(0.0, std::sqrt(noise_power));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g(rng);
  } else {
    std::normal_distribution<double> g(0.0, std::sqrt(noise_power / 2.0));
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double re = g(rng);
      const double im = g(rng);
      out[i] += cplx{re, im};
    }
  }
  return out;
}

std::pair<std::size_t, std::size_t> interval_indices(const Interval& iv, double sample_rate,
                                                     std::size_t n, double time_origin) {
  constexpr double kSlack = 1e-9;  // absorbs rounding in t * fs
  const double duration = static_cast<double>(n) / sample_rate;
  if (!(iv.end > iv.start)) throw InvalidParameter("interval end must exceed its start");
  if (iv.start < time_origin - kSlack / sample_rate ||
      iv.end > time_origin + duration + kSlack / sample_rate)
    throw InvalidParameter("interval lies outside the signal");
  const double a = std::ceil((iv.start - time_origin) * sample_rate - kSlack);
  const double b = std::ceil((iv.end - time_origin) * sample_rate - kSlack);
  const auto lo = static_cast<std::size_t>(std::max(0.0, a));
  const auto hi = std::min(n, static_cast<std::size_t>(std::max(0.0, b)));
  if (hi <= lo) throw InvalidParameter("interval contains no samples");
  return {lo, hi};
}

namespace {

double restricted_error(const Signal& ref, const Signal& est, std::pair<std::size_t, std::size_t> r,
                        const char* name) {
  double diff = 0.0, base = 0.0;
  for (std::size_t i = r.first; i < r.second; ++i) {
    diff += std::norm(ref[i] - est[i]);
    base += std::norm(ref[i]);
  }
  if (base == 0.0) throw UndefinedMetric(std::string(name) + ": reference has zero energy on the interval");
  return std::sqrt(diff / base);
}

}  // namespace

IntervalMetrics interval_errors(const Signal& y, const Signal& y1, const Signal& y2,
                                const Interval& i1, const Interval& i2, const Signal* reference,
                                double time_origin) {
  const Signal& ref = reference ? *reference : y;
  if (y1.size() != ref.size() || y2.size() != ref.size() || y.size() != ref.size())
    throw InvalidDimension("interval_errors: signal lengths differ");
  const auto r1 = interval_indices(i1, ref.sample_rate(), ref.size(), time_origin);
  const auto r2 = interval_indices(i2, ref.sample_rate(), ref.size(), time_origin);
  return {i1, i2, restricted_error(ref, y1, r1, "m1"), restricted_error(ref, y2, r2, "m2")};
}

IntervalMetrics component_interval_errors(const Signal& short_truth, const Signal& long_truth,
                                          const Signal& y1, const Signal& y2, const Interval& i1,
                                          const Interval& i2, double time_origin) {
  const std::size_t n = short_truth.size();
  if (long_truth.size() != n || y1.size() != n || y2.size() != n)
    throw InvalidDimension("component_interval_errors: signal lengths differ");
  const double fs = short_truth.sample_rate();
  return {i1, i2,
          restricted_error(short_truth, y1, interval_indices(i1, fs, n, time_origin), "m1"),
          restricted_error(long_truth, y2, interval_indices(i2, fs, n, time_origin), "m2")};
}

ProcessedEcho lfm_process(const Signal& impulse_response, const LfmProcessing& proc,
                          std::optional<double> snr_db, std::uint64_t seed) {
  const double fs = impulse_response.sample_rate();
  const Signal chirp = lfm_chirp(proc.f_start, proc.f_end, proc.duration, fs);
  Signal echo = proc.circular ? circular_convolve(impulse_response, chirp)
                              : convolve_response(impulse_response, chirp);
  if (proc.butterworth)
    echo = butterworth_bandlimit(echo, proc.butterworth_order, proc.butterworth_cutoff);
  Signal noisy = snr_db && std::isfinite(*snr_db) ? add_awgn(echo, *snr_db, seed) : echo;
  auto crop = [&](const Signal& s) {
    CVec v(s.vec().begin(), s.vec().begin() + static_cast<std::ptrdiff_t>(impulse_response.size()));
    return Signal(std::move(v), fs);
  };
  if (proc.circular) return {circular_matched_filter(echo, chirp), circular_matched_filter(noisy, chirp)};
  return {crop(matched_filter(echo, chirp)), crop(matched_filter(noisy, chirp))};
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json arrival_json(const Arrival& a) {
  return {{"arrival", a.arrival}, {"duration", a.duration}, {"f_low", a.f_low},
          {"f_high", a.f_high},   {"amplitude", a.amplitude}};
}

Arrival arrival_from(const nlohmann::json& j) {
  Arrival a;
  a.arrival = j.at("arrival").get<double>();
  a.duration = j.at("duration").get<double>();
  a.f_low = j.at("f_low").get<double>();
  a.f_high = j.at("f_high").get<double>();
  a.amplitude = j.value("amplitude", 1.0);
  return a;
}

}  // namespace

nlohmann::json to_json(const SyntheticTargetSpec& spec) {
  nlohmann::json j;
  j["sample_rate"] = spec.sample_rate;
  j["N"] = spec.n;
  j["periodic"] = spec.periodic;
  j["pulse"] = spec.pulse ? arrival_json(*spec.pulse) : nlohmann::json(nullptr);
  j["wavepackets"] = nlohmann::json::array();
  for (const auto& w : spec.wavepackets) j["wavepackets"].push_back(arrival_json(w));
  j["resonances"] = nlohmann::json::array();
  for (const auto& r : spec.resonances)
    j["resonances"].push_back({{"frequency", r.frequency},
                               {"decay", r.decay},
                               {"amplitude", r.amplitude},
                               {"start", r.start},
                               {"phase", r.phase}});
  return j;
}

SyntheticTargetSpec target_spec_from_json(const nlohmann::json& j) {
  SyntheticTargetSpec s;
  try {
    s.sample_rate = j.at("sample_rate").get<double>();
    s.n = j.at("N").get<std::size_t>();
    s.periodic = j.value("periodic", false);
    if (j.contains("pulse") && !j["pulse"].is_null()) s.pulse = arrival_from(j["pulse"]);
    for (const auto& w : j.value("wavepackets", nlohmann::json::array())) s.wavepackets.push_back(arrival_from(w));
    for (const auto& r : j.value("resonances", nlohmann::json::array())) {
      Resonance res;
      res.frequency = r.at("frequency").get<double>();
      res.decay = r.at("decay").get<double>();
      res.amplitude = r.value("amplitude", 1.0);
      res.start = r.value("start", 0.0);
      res.phase = r.value("phase", 0.0);
      s.resonances.push_back(res);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed target spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const OscillatorSpec& spec) {
  return {{"tau", spec.tau}, {"f0", spec.f0}, {"f", spec.f},
          {"forcing_amplitude", spec.forcing_amplitude},
          {"sample_rate", spec.sample_rate}, {"N", spec.n}};
}

OscillatorSpec oscillator_spec_from_json(const nlohmann::json& j) {
  OscillatorSpec s;
  try {
    s.tau = j.value("tau", s.tau);
    s.f0 = j.value("f0", s.f0);
    s.f = j.value("f", s.f);
    s.forcing_amplitude = j.value("forcing_amplitude", s.forcing_amplitude);
    s.sample_rate = j.value("sample_rate", s.sample_rate);
    s.n = j.value("N", s.n);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed oscillator spec: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace morphsep
