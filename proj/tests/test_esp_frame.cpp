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

#include <catch2/catch_amalgamated.hpp>

#include "morphsep/error.hpp"
#include "morphsep/esp_frame.hpp"
#include "support.hpp"

using namespace morphsep;

namespace {

// Atom straight from its definition.
CVec oracle_atom(const CVec& e, std::size_t k, std::size_t m) {
  const std::size_t n = e.size();
  CVec a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = (i + n - m) % n;
    a[i] = e[r] * std::polar(1.0, 2.0 * testing::kPi * double(k * r % n) / double(n));
  }
  return a;
}

std::vector<CVec> random_envelopes(std::size_t n, std::size_t l, std::uint64_t seed) {
  std::vector<CVec> envs;
  for (std::size_t i = 0; i < l; ++i) envs.push_back(testing::random_cvec(n, seed + i));
  return envs;
}

}  // namespace

TEST_CASE("Fast transforms match the dense definition") {
  for (std::size_t n : {8, 16, 32}) {
    for (std::size_t l : {1, 2, 3}) {
      const auto envs = random_envelopes(n, l, 100 * n + l);
      const EspFrame f{EnvelopeSet(envs)};
      const CVec w = testing::random_cvec(n, 7 * n + l);
      const CVec c = testing::random_cvec(l * n * n, 9 * n + l);

      CVec fast(f.coeff_dim()), oracle(f.coeff_dim());
      f.analyze(w, fast);
      CVec synth_oracle(n, cplx{});
      for (std::size_t li = 0; li < l; ++li)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t m = 0; m < n; ++m) {
            const CVec a = oracle_atom(envs[li], k, m);
            oracle[f.index(li, k, m)] = testing::dot(w, a);
            for (std::size_t i = 0; i < n; ++i) synth_oracle[i] += c[f.index(li, k, m)] * a[i];
          }
      CHECK(testing::rel_diff(fast, oracle) < 1e-12);
      CVec synth(n);
      f.synthesize(c, synth);
      CHECK(testing::rel_diff(synth, synth_oracle) < 1e-12);

      // The in-class dense reference agrees too.
      CVec dense(f.coeff_dim());
      f.analyze_dense(w, dense);
      CHECK(testing::rel_diff(dense, oracle) < 1e-12);
    }
  }
}

TEST_CASE("Frame identity A A* = N sum ||e_l||^2 for random envelopes") {
  for (std::size_t n : {8, 16, 32}) {
    for (std::size_t l : {1, 2, 3}) {
      const auto envs = random_envelopes(n, l, 31 * n + l);
      double p = 0.0;
      for (const auto& e : envs) p += double(n) * norm_sq(e);
      const EspFrame f{EnvelopeSet(envs)};
      CHECK(std::abs(f.frame_constant() - p) < 1e-12 * p);
      const CVec w = testing::random_cvec(n, 5 * n + l);
      CVec c(f.coeff_dim()), back(n);
      f.analyze(w, c);
      f.synthesize(c, back);
      CVec pw = w;
      for (auto& x : pw) x *= p;
      CHECK(testing::rel_diff(back, pw) < 1e-12);
    }
  }
}

TEST_CASE("Atom factorization S^m D(e) s_k") {
  const auto envs = random_envelopes(10, 2, 77);
  const EspFrame f{EnvelopeSet(envs)};
  for (std::size_t k : {0, 3, 9})
    for (std::size_t m : {0, 4, 9}) {
      CVec sk(10);
      for (std::size_t i = 0; i < 10; ++i) sk[i] = std::polar(1.0, 2.0 * testing::kPi * double(k * i) / 10.0);
      const CVec viaops = esp_ops::shift(esp_ops::diag(envs[1], sk), static_cast<long long>(m));
      CHECK(testing::rel_diff(f.atom(1, k, m), viaops) < 1e-13);
      CHECK(testing::rel_diff(f.atom(1, k, m), oracle_atom(envs[1], k, m)) < 1e-13);
    }
  CHECK_THROWS_AS(f.atom(2, 0, 0), InvalidDimension);
}

TEST_CASE("Elementary operators") {
  const CVec w{{1, 1}, {2, 0}, {3, -1}, {4, 0}};
  CHECK(esp_ops::shift(w, 1) == CVec{{4, 0}, {1, 1}, {2, 0}, {3, -1}});
  CHECK(esp_ops::shift(w, -1) == CVec{{2, 0}, {3, -1}, {4, 0}, {1, 1}});
  CHECK(esp_ops::shift(w, 4) == w);
  CHECK(esp_ops::conj_flip(w) == CVec{{1, -1}, {4, 0}, {3, 1}, {2, 0}});
  CHECK(esp_ops::diag(w, w)[0] == cplx{0, 2});
  CHECK_THROWS_AS(esp_ops::diag(w, CVec(3)), InvalidDimension);
}

TEST_CASE("Envelope builders") {
  const double durations[] = {0.27e-3, 0.1e-3};
  const EnvelopeSet rect = make_rectangular_envelopes(durations, 100e3, 60);
  CHECK(rect.count() == 2);
  CHECK(norm_sq(rect[0]) == 27.0);
  CHECK(rect[0][26] == cplx{1, 0});
  CHECK(rect[0][27] == cplx{});
  CHECK(norm_sq(rect[1]) == 10.0);

  const double taus[] = {1e-3};
  const EnvelopeSet ex = make_exponential_envelopes(taus, 100e3, 60);
  CHECK(std::abs(ex[0][10].real() - std::exp(-0.1)) < 1e-15);

  const EnvelopeSet both = normalize_parseval(concat(rect, ex));
  CHECK(both.count() == 3);
  CHECK(std::abs(both.frame_bound() - 1.0) < 1e-12);
  // Builders reject bad parameters.
  const double zero[] = {0.0}, tiny[] = {1e-9}, huge[] = {1.0};
  CHECK_THROWS_AS(make_rectangular_envelopes(zero, 1e5, 10), InvalidEnvelope);
  CHECK_THROWS_AS(make_rectangular_envelopes(tiny, 1e5, 10), InvalidEnvelope);
  CHECK_THROWS_AS(make_rectangular_envelopes(huge, 1e5, 10), InvalidEnvelope);
  CHECK_THROWS_AS(make_exponential_envelopes(zero, 1e5, 10), InvalidEnvelope);
  CHECK_THROWS_AS(concat(rect, make_exponential_envelopes(taus, 100e3, 50)), InvalidEnvelope);
}

TEST_CASE("Envelope sets reject degenerate input") {
  CHECK_THROWS_AS(EnvelopeSet(std::vector<CVec>{}), InvalidEnvelope);
  CHECK_THROWS_AS(EnvelopeSet({CVec(4, cplx{})}), InvalidEnvelope);
  CHECK_THROWS_AS(EnvelopeSet({CVec(4, 1.0), CVec(5, 1.0)}), InvalidEnvelope);
  CHECK_THROWS_AS(EnvelopeSet({CVec(4, 1.0)}, {"a", "b"}), InvalidEnvelope);
}

TEST_CASE("Coefficient cap is enforced before allocating") {
  EspOptions small;
  small.max_coefficients = 1000;
  CHECK_THROWS_AS(build_esp_frame(EnvelopeSet({CVec(40, 1.0)}), small), InvalidDimension);
  CHECK_NOTHROW(build_esp_frame(EnvelopeSet({CVec(30, 1.0)}), small));
}

TEST_CASE("Degenerate envelopes reduce to identity and DFT atoms") {
  const std::size_t n = 16;
  CVec one_hot(n, cplx{}), constant(n, cplx{1, 0});
  one_hot[0] = 1.0;
  const EspFrame spikes{EnvelopeSet({one_hot})};
  const EspFrame tones{EnvelopeSet({constant})};
  const CVec a = spikes.atom(0, 5, 3);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - (i == 3 ? cplx{1, 0} : cplx{})) < 1e-15);
  const CVec t = tones.atom(0, 2, 0);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(t[i] - std::polar(1.0, 2.0 * testing::kPi * 2.0 * double(i) / double(n))) < 1e-13);
}

TEST_CASE("Envelope descriptions round-trip through JSON") {
  const nlohmann::json j = nlohmann::json::parse(R"({"N": 32, "sample_rate": 1e4, "normalize": true,
    "envelopes": [{"kind": "rectangular", "param": 1e-3},
                  {"kind": "exponential", "param": 2e-3},
                  {"kind": "raw", "samples": [1.0, [0.5, -0.5]]}]})");
  CHECK_THROWS_AS(build_envelopes(envelope_config_from_json(j)), InvalidEnvelope);  // raw too short
  nlohmann::json ok = j;
  ok["envelopes"].erase(2);
  const EnvelopeConfig cfg = envelope_config_from_json(ok);
  const EnvelopeSet set = build_envelopes(cfg);
  CHECK(set.count() == 2);
  CHECK(std::abs(set.frame_bound() - 1.0) < 1e-12);
  const EnvelopeSet again = build_envelopes(envelope_config_from_json(to_json(cfg)));
  CHECK(again[1] == set[1]);
  CHECK_THROWS_AS(envelope_config_from_json(nlohmann::json::parse(R"({"envelopes": [{"kind": "gauss", "param": 1}]})")),
                  FormatError);
  CHECK_THROWS_AS(envelope_config_from_json(nlohmann::json::array()), FormatError);
}
