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

#include "morphsep/esp_frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "morphsep/error.hpp"

namespace morphsep {

EnvelopeSet::EnvelopeSet(std::vector<CVec> envelopes, std::vector<std::string> labels)
    : envelopes_(std::move(envelopes)), labels_(std::move(labels)) {
  if (envelopes_.empty()) throw InvalidEnvelope("envelope set needs at least one envelope");
  n_ = envelopes_.front().size();
  if (n_ == 0) throw InvalidEnvelope("envelopes must have length >= 1");
  for (std::size_t l = 0; l < envelopes_.size(); ++l) {
    if (envelopes_[l].size() != n_)
      throw InvalidEnvelope("envelope " + std::to_string(l) + " has length " +
                            std::to_string(envelopes_[l].size()) + ", expected " +
                            std::to_string(n_));
    if (norm_sq(envelopes_[l]) == 0.0)
      throw InvalidEnvelope("envelope " + std::to_string(l) + " is identically zero");
  }
  if (labels_.empty()) {
    for (std::size_t l = 0; l < envelopes_.size(); ++l) labels_.push_back("e" + std::to_string(l));
  } else if (labels_.size() != envelopes_.size()) {
    throw InvalidEnvelope("one label per envelope required");
  }
}

double EnvelopeSet::frame_bound() const noexcept {
  double s = 0.0;
  for (const auto& e : envelopes_) s += norm_sq(e);
  return static_cast<double>(n_) * s;
}

namespace {

std::string seconds_label(const char* prefix, double seconds) {
  std::ostringstream os;
  os << prefix << ':' << seconds * 1e3 << "ms";
  return os.str();
}

}  // namespace

EnvelopeSet make_rectangular_envelopes(std::span<const double> durations, double sample_rate,
                                       std::size_t n) {
  if (n == 0) throw InvalidDimension("envelope length must be positive");
  if (!(sample_rate > 0.0)) throw InvalidParameter("sample rate must be positive");
  std::vector<CVec> envs;
  std::vector<std::string> labels;
  for (double t : durations) {
    if (!(t > 0.0)) throw InvalidEnvelope("rectangular window duration must be positive");
    const double count = std::round(t * sample_rate);
    if (count < 1.0)
      throw InvalidEnvelope("rectangular window of " + std::to_string(t) +
                            " s rounds to zero samples");
    if (count > static_cast<double>(n))
      throw InvalidEnvelope("rectangular window longer than the signal");
    CVec e(n, cplx{});
    std::fill_n(e.begin(), static_cast<std::size_t>(count), cplx{1.0, 0.0});
    envs.push_back(std::move(e));
    labels.push_back(seconds_label("rect", t));
  }
  return EnvelopeSet(std::move(envs), std::move(labels));
}

EnvelopeSet make_exponential_envelopes(std::span<const double> time_constants,
                                       double sample_rate, std::size_t n) {
  if (n == 0) throw InvalidDimension("envelope length must be positive");
  if (!(sample_rate > 0.0)) throw InvalidParameter("sample rate must be positive");
  std::vector<CVec> envs;
  std::vector<std::string> labels;
  for (double tau : time_constants) {
    if (!(tau > 0.0)) throw InvalidEnvelope("exponential time constant must be positive");
    CVec e(n);
    const double rate = 1.0 / (tau * sample_rate);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(-static_cast<double>(i) * rate);
    envs.push_back(std::move(e));
    labels.push_back(seconds_label("exp", tau));
  }
  return EnvelopeSet(std::move(envs), std::move(labels));
}

EnvelopeSet concat(const EnvelopeSet& a, const EnvelopeSet& b) {
  if (a.length() != b.length()) throw InvalidEnvelope("cannot concatenate envelope sets of different N");
  auto envs = a.envelopes();
  auto labels = a.labels();
  envs.insert(envs.end(), b.envelopes().begin(), b.envelopes().end());
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return EnvelopeSet(std::move(envs), std::move(labels));
}

EnvelopeSet normalize_parseval(const EnvelopeSet& env) {
  const double target =
      1.0 / std::sqrt(static_cast<double>(env.length()) * static_cast<double>(env.count()));
  std::vector<CVec> envs = env.envelopes();
  for (auto& e : envs) {
    const double s = target / norm(e);
    for (auto& v : e) v *= s;
  }
  return EnvelopeSet(std::move(envs), env.labels());
}

namespace esp_ops {

CVec shift(std::span<const cplx> w, long long shift) {
  const auto n = static_cast<long long>(w.size());
  CVec out(w.size());
  if (n == 0) return out;
  const long long s = ((shift % n) + n) % n;
  for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>((i + s) % n)] = w[static_cast<std::size_t>(i)];
  return out;
}

CVec diag(std::span<const cplx> v, std::span<const cplx> w) {
  if (v.size() != w.size()) throw InvalidDimension("diag: size mismatch");
  CVec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = v[i] * w[i];
  return out;
}

CVec conj_flip(std::span<const cplx> w) {
  const std::size_t n = w.size();
  CVec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::conj(w[(n - i) % n]);
  return out;
}

}  // namespace esp_ops

namespace {

void check_capacity(const EnvelopeSet& env, const EspOptions& opts) {
  const std::size_t n = env.length();
  const std::size_t l = env.count();
  const bool overflow = n != 0 && (n > opts.max_coefficients / n || l > opts.max_coefficients / (n * n));
  if (overflow || l * n * n > opts.max_coefficients) {
    std::ostringstream os;
    os << "ESP frame with L=" << l << ", N=" << n << " needs " << l << "*" << n << "^2 coefficients, "
       << "above the configured cap of " << opts.max_coefficients;
    throw InvalidDimension(os.str());
  }
}

// Number of partial sums used by synthesis. Fixed so the reduction order, and
// hence the result, does not depend on the thread count.
constexpr std::size_t kReductionChunks = 64;
constexpr std::size_t kBlockRows = 32;

// Written out so GCC does not route through the Annex G __muldc3 helper.
inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// out[j] = a[j] * b[(j - k) mod N]
inline void multiply_rotated(const cplx* a, const cplx* b, std::size_t k, std::size_t n, cplx* out) {
  for (std::size_t j = 0; j < k; ++j) out[j] = mul(a[j], b[j + n - k]);
  for (std::size_t j = k; j < n; ++j) out[j] = mul(a[j], b[j - k]);
}

inline void accumulate_rotated(const cplx* a, const cplx* b, std::size_t k, std::size_t n, cplx* acc) {
  for (std::size_t j = 0; j < k; ++j) acc[j] += mul(a[j], b[j + n - k]);
  for (std::size_t j = k; j < n; ++j) acc[j] += mul(a[j], b[j - k]);
}

std::size_t block_rows_for(std::size_t rows) { return std::min(kBlockRows, rows); }

std::optional<fft::BatchPlan> tail_plan(std::size_t n, std::size_t tail, fft::Direction dir, bool in_place) {
  if (tail == 0) return std::nullopt;
  return fft::BatchPlan(n, tail, dir, in_place);
}

}  // namespace

EspFrame::EspFrame(EnvelopeSet envelopes, EspOptions options)
    : envelopes_((check_capacity(envelopes, options), std::move(envelopes))),
      n_(envelopes_.length()),
      l_(envelopes_.count()),
      frame_constant_(envelopes_.frame_bound()),
      forward_(n_, fft::Direction::Forward),
      backward_(n_, fft::Direction::Backward),
      block_rows_(block_rows_for(l_ * n_)),
      tail_rows_((l_ * n_) % block_rows_),
      block_backward_(n_, block_rows_, fft::Direction::Backward, true),
      block_forward_(n_, block_rows_, fft::Direction::Forward, false),
      tail_backward_(tail_plan(n_, tail_rows_, fft::Direction::Backward, true)),
      tail_forward_(tail_plan(n_, tail_rows_, fft::Direction::Forward, false)) {
  const double inv_n = 1.0 / static_cast<double>(n_);
  spectra_.reserve(l_);
  flip_spectra_.reserve(l_);
  for (const auto& e : envelopes_.envelopes()) {
    CVec spec(n_);
    forward_.execute(e, spec);
    CVec flip(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      spec[j] *= inv_n;
      flip[j] = std::conj(spec[j]);
    }
    spectra_.push_back(std::move(spec));
    flip_spectra_.push_back(std::move(flip));
  }
}

std::string EspFrame::id() const {
  std::ostringstream os;
  os << "esp:" << n_ << ":" << l_;
  for (const auto& label : envelopes_.labels()) os << ":" << label;
  return os.str();
}

void EspFrame::analyze(std::span<const cplx> w, std::span<cplx> coeffs) const {
  check_analyze_dims(w, coeffs);
  CVec spectrum(n_);
  forward_.execute(w, spectrum);
  const std::size_t rows = l_ * n_;
  const auto blocks = static_cast<long long>((rows + block_rows_ - 1) / block_rows_);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < blocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * block_rows_;
    const std::size_t end = std::min(rows, begin + block_rows_);
    // c_{k,l} = F^-1 [ (F w) . rot_k(F H e_l) ], built in place.
    for (std::size_t row = begin; row < end; ++row)
      multiply_rotated(spectrum.data(), flip_spectra_[row / n_].data(), row % n_, n_,
                       coeffs.data() + row * n_);
    auto block = coeffs.subspan(begin * n_, (end - begin) * n_);
    (end - begin == block_rows_ ? block_backward_ : *tail_backward_).execute(block, block);
  }
}

void EspFrame::synthesize(std::span<const cplx> coeffs, std::span<cplx> w) const {
  check_synthesize_dims(coeffs, w);
  const std::size_t rows = l_ * n_;
  const std::size_t blocks = (rows + block_rows_ - 1) / block_rows_;
  const std::size_t chunks = std::min(kReductionChunks, blocks);
  std::vector<CVec> partial(chunks, CVec(n_, cplx{}));
#pragma omp parallel
  {
    CVec tmp(block_rows_ * n_);
#pragma omp for schedule(static)
    for (long long c = 0; c < static_cast<long long>(chunks); ++c) {
      const std::size_t chunk = static_cast<std::size_t>(c);
      cplx* acc = partial[chunk].data();
      for (std::size_t b = chunk * blocks / chunks; b < (chunk + 1) * blocks / chunks; ++b) {
        const std::size_t begin = b * block_rows_;
        const std::size_t count = std::min(rows, begin + block_rows_) - begin;
        auto out = std::span<cplx>(tmp).first(count * n_);
        (count == block_rows_ ? block_forward_ : *tail_forward_)
            .execute(coeffs.subspan(begin * n_, count * n_), out);
        for (std::size_t r = 0; r < count; ++r) {
          const std::size_t row = begin + r;
          accumulate_rotated(out.data() + r * n_, spectra_[row / n_].data(), row % n_, n_, acc);
        }
      }
    }
  }
  CVec total(n_, cplx{});
  for (const auto& p : partial)
    for (std::size_t j = 0; j < n_; ++j) total[j] += p[j];
  backward_.execute(total, w);
}

CVec EspFrame::atom(std::size_t l, std::size_t k, std::size_t m) const {
  if (l >= l_ || k >= n_ || m >= n_) throw InvalidDimension("atom index out of range");
  CVec a(n_);
  const auto& e = envelopes_[l];
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n_);
  for (std::size_t n = 0; n < n_; ++n) {
    const std::size_t t = (n + n_ - m) % n_;
    const std::size_t phase = (k * t) % n_;
    a[n] = e[t] * std::polar(1.0, two_pi_over_n * static_cast<double>(phase));
  }
  return a;
}

void EspFrame::analyze_dense(std::span<const cplx> w, std::span<cplx> coeffs) const {
  check_analyze_dims(w, coeffs);
  for (std::size_t l = 0; l < l_; ++l)
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t m = 0; m < n_; ++m) coeffs[index(l, k, m)] = inner(w, atom(l, k, m));
}

void EspFrame::synthesize_dense(std::span<const cplx> coeffs, std::span<cplx> w) const {
  check_synthesize_dims(coeffs, w);
  std::fill(w.begin(), w.end(), cplx{});
  for (std::size_t l = 0; l < l_; ++l)
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t m = 0; m < n_; ++m) {
        const cplx c = coeffs[index(l, k, m)];
        if (c == cplx{}) continue;
        const CVec a = atom(l, k, m);
        for (std::size_t n = 0; n < n_; ++n) w[n] += c * a[n];
      }
}

std::shared_ptr<EspFrame> build_esp_frame(EnvelopeSet envelopes, EspOptions options) {
  return std::make_shared<EspFrame>(std::move(envelopes), options);
}

CoefficientSet esp_analyze(const EspFrame& frame, const Signal& w) { return frame.analyze(w); }

Signal esp_synthesize(const EspFrame& frame, const CoefficientSet& c, double sample_rate) {
  return frame.synthesize(c, sample_rate);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

EnvelopeKind kind_from_string(const std::string& s) {
  if (s == "rectangular") return EnvelopeKind::Rectangular;
  if (s == "exponential") return EnvelopeKind::Exponential;
  if (s == "raw") return EnvelopeKind::Raw;
  throw FormatError("unknown envelope kind '" + s + "'");
}

const char* kind_to_string(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::Rectangular: return "rectangular";
    case EnvelopeKind::Exponential: return "exponential";
    case EnvelopeKind::Raw: return "raw";
  }
  return "raw";
}

}  // namespace

EnvelopeConfig envelope_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("envelope description must be a JSON object");
  EnvelopeConfig cfg;
  try {
    cfg.n = j.value("N", std::size_t{0});
    cfg.sample_rate = j.value("sample_rate", 0.0);
    cfg.normalize = j.value("normalize", true);
    if (!j.contains("envelopes") || !j["envelopes"].is_array())
      throw FormatError("envelope description needs an 'envelopes' array");
    for (const auto& item : j["envelopes"]) {
      EnvelopeEntry e;
      e.kind = kind_from_string(item.at("kind").get<std::string>());
      if (e.kind == EnvelopeKind::Raw) {
        for (const auto& s : item.at("samples")) {
          if (s.is_array()) e.samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
          else e.samples.emplace_back(s.get<double>(), 0.0);
        }
      } else {
        e.param = item.at("param").get<double>();
      }
      cfg.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed envelope description: ") + ex.what());
  }
  return cfg;
}

nlohmann::json to_json(const EnvelopeConfig& cfg) {
  nlohmann::json j;
  if (cfg.n != 0) j["N"] = cfg.n;
  if (cfg.sample_rate != 0.0) j["sample_rate"] = cfg.sample_rate;
  j["normalize"] = cfg.normalize;
  j["envelopes"] = nlohmann::json::array();
  for (const auto& e : cfg.entries) {
    nlohmann::json item;
    item["kind"] = kind_to_string(e.kind);
    if (e.kind == EnvelopeKind::Raw) {
      item["samples"] = nlohmann::json::array();
      for (const auto& s : e.samples) {
        if (s.imag() == 0.0) item["samples"].push_back(s.real());
        else item["samples"].push_back({s.real(), s.imag()});
      }
    } else {
      item["param"] = e.param;
    }
    j["envelopes"].push_back(std::move(item));
  }
  return j;
}

EnvelopeSet build_envelopes(const EnvelopeConfig& cfg, std::size_t n, double sample_rate) {
  const std::size_t len = cfg.n != 0 ? cfg.n : n;
  const double fs = cfg.sample_rate != 0.0 ? cfg.sample_rate : sample_rate;
  if (len == 0) throw InvalidDimension("envelope length N not specified");
  if (cfg.entries.empty()) throw InvalidEnvelope("envelope description lists no envelopes");
  std::vector<CVec> envs;
  std::vector<std::string> labels;
  for (const auto& e : cfg.entries) {
    if (e.kind == EnvelopeKind::Raw) {
      if (e.samples.size() != len)
        throw InvalidEnvelope("raw envelope has " + std::to_string(e.samples.size()) +
                              " samples, expected " + std::to_string(len));
      envs.push_back(e.samples);
      labels.push_back("raw");
      continue;
    }
    const double p[] = {e.param};
    EnvelopeSet one = e.kind == EnvelopeKind::Rectangular ? make_rectangular_envelopes(p, fs, len)
                                                          : make_exponential_envelopes(p, fs, len);
    envs.push_back(one[0]);
    labels.push_back(one.labels()[0]);
  }
  EnvelopeSet set(std::move(envs), std::move(labels));
  return cfg.normalize ? normalize_parseval(set) : set;
}

EnvelopeConfig describe_envelopes(const EnvelopeSet& env, double sample_rate) {
  EnvelopeConfig cfg;
  cfg.n = env.length();
  cfg.sample_rate = sample_rate;
  cfg.normalize = false;
  for (const auto& e : env.envelopes()) cfg.entries.push_back({EnvelopeKind::Raw, 0.0, e});
  return cfg;
}

}  // namespace morphsep
