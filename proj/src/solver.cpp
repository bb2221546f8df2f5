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

#include "morphsep/solver.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

#include "morphsep/error.hpp"

namespace morphsep {

void SolverConfig::validate() const {
  if (lambda_fraction) {
    if (!(*lambda_fraction > 0.0) || !std::isfinite(*lambda_fraction))
      throw InvalidParameter("lambda fraction must be positive");
  } else if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !std::isfinite(lambda1) ||
             !std::isfinite(lambda2)) {
    throw InvalidParameter("lambda1 and lambda2 must be positive");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidParameter("mu must be positive");
  if (max_iters < 1) throw InvalidParameter("max_iters must be at least 1");
  if (!(residual_tol >= 0.0)) throw InvalidParameter("residual_tol must be nonnegative");
}

double lambda_max(const Signal& y, const FrameOperator& a1, const FrameOperator& a2) {
  if (y.size() != a1.signal_dim() || y.size() != a2.signal_dim())
    throw InvalidDimension("lambda_max: signal length does not match the frames");
  CVec c1(a1.coeff_dim()), c2(a2.coeff_dim());
  a1.analyze(y.samples(), c1);
  a2.analyze(y.samples(), c2);
  // At exactly this weight the BPD iterates converge onto the threshold from
  // below, and transform rounding can push a coefficient one ulp over it.
  constexpr double kMargin = 1e-12;
  return std::max(norm_inf(c1), norm_inf(c2)) * (1.0 + kMargin);
}

namespace {

constexpr std::size_t kStallWindow = 10;

// u = soft(x + d, t); d <- u - d, so d then holds v.
void shrink_step(std::span<const cplx> x, std::span<cplx> d, std::span<cplx> u, double t) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    const cplx s = x[j] + d[j];
    const double mag = std::sqrt(s.real() * s.real() + s.imag() * s.imag());
    const cplx uj = mag <= t ? cplx{} : s * ((mag - t) / mag);
    u[j] = uj;
    d[j] = uj - d[j];
  }
}

// On entry x holds alpha A* c (the new d) and d holds v.
// On exit d = alpha A* c and x = d + v. Returns ||x||_1.
double recombine(std::span<cplx> x, std::span<cplx> d) {
  double l1 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const cplx dn = x[j];
    x[j] = dn + d[j];
    d[j] = dn;
    l1 += std::sqrt(x[j].real() * x[j].real() + x[j].imag() * x[j].imag());
  }
  return l1;
}

}  // namespace

SeparationResult solve_mca(const Signal& y, const FrameOperator& a1, const FrameOperator& a2,
                           const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n = y.size();
  if (a1.signal_dim() != n || a2.signal_dim() != n)
    throw InvalidDimension("solve_mca: signal has " + std::to_string(n) +
                           " samples but frames expect " + std::to_string(a1.signal_dim()) +
                           " and " + std::to_string(a2.signal_dim()));

  if (!std::isfinite(norm_sq(y.samples()))) throw InvalidParameter("solve_mca: signal has non-finite samples");

  double lambda1 = cfg.lambda1;
  double lambda2 = cfg.lambda2;
  if (cfg.lambda_fraction) {
    const double lmax = lambda_max(y, a1, a2);
    // A zero signal has lambda_max = 0; any positive weight then gives the zero solution.
    const double base = lmax > 0.0 ? lmax : 1.0;
    lambda1 = lambda2 = *cfg.lambda_fraction * base;
  }

  const double p1 = a1.frame_constant();
  const double p2 = a2.frame_constant();
  const double alpha = cfg.mode == SolverMode::BP ? 1.0 / (p1 + p2) : 1.0 / (cfg.mu + p1 + p2);
  const double t1 = lambda1 / cfg.mu;
  const double t2 = lambda2 / cfg.mu;

  CVec x1(a1.coeff_dim()), x2(a2.coeff_dim());
  a1.analyze(y.samples(), x1);
  a2.analyze(y.samples(), x2);
  CVec d1(x1.size(), cplx{}), d2(x2.size(), cplx{});
  CVec u1(x1.size()), u2(x2.size());
  CVec av1(n), av2(n), c(n);

  const double y_norm = norm(y.samples());
  const double scale = y_norm > 0.0 ? 1.0 / y_norm : 1.0;
  // After the update, y - A1 x1 - A2 x2 = (1 - alpha (p1 + p2)) c.
  const double residual_factor = 1.0 - alpha * (p1 + p2);

  std::vector<double> objective;
  if (cfg.record_objective) objective.reserve(cfg.max_iters);
  std::array<double, kStallWindow> history{};
  std::size_t iter = 0;

  while (iter < cfg.max_iters) {
    shrink_step(x1, d1, u1, t1);
    shrink_step(x2, d2, u2, t2);
    a1.synthesize(d1, av1);
    a2.synthesize(d2, av2);
    double c_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = y[i] - av1[i] - av2[i];
      c_sq += c[i].real() * c[i].real() + c[i].imag() * c[i].imag();
    }
    if (!std::isfinite(c_sq))
      throw NumericalDivergence("solver diverged at iteration " + std::to_string(iter + 1),
                                iter + 1);
    a1.analyze(c, x1);
    a2.analyze(c, x2);
    for (auto& v : x1) v *= alpha;
    for (auto& v : x2) v *= alpha;
    const double l1_1 = recombine(x1, d1);
    const double l1_2 = recombine(x2, d2);
    ++iter;

    if (cfg.record_objective) {
      const double r_sq = residual_factor * residual_factor * c_sq;
      objective.push_back(lambda1 * l1_1 + lambda2 * l1_2 + 0.5 * r_sq);
    }
    if (cfg.residual_tol > 0.0) {
      const double rel = std::sqrt(c_sq) * scale;
      const std::size_t slot = iter % kStallWindow;
      if (iter > kStallWindow && std::abs(rel - history[slot]) < cfg.residual_tol) break;
      history[slot] = rel;
    }
  }

  Signal y1 = Signal::zeros(n, y.sample_rate());
  Signal y2 = Signal::zeros(n, y.sample_rate());
  a1.synthesize(x1, y1.samples());
  a2.synthesize(x2, y2.samples());
  if (!std::isfinite(norm_sq(y1.samples())) || !std::isfinite(norm_sq(y2.samples())))
    throw NumericalDivergence("solver produced a non-finite component", iter);
  const Signal residual = y - y1 - y2;
  const double final_residual = norm(residual.samples());

  SeparationResult out{std::move(y1),
                       std::move(y2),
                       {std::move(x1), a1.coeff_shape(), a1.id()},
                       {std::move(x2), a2.coeff_shape(), a2.id()},
                       {},
                       {},
                       iter,
                       final_residual,
                       y_norm > 0.0 ? final_residual / y_norm : final_residual,
                       lambda1,
                       lambda2,
                       std::move(objective)};
  if (cfg.report_sparse_iterate) {
    out.u1 = {std::move(u1), a1.coeff_shape(), a1.id()};
    out.u2 = {std::move(u2), a2.coeff_shape(), a2.id()};
  }
  return out;
}

namespace {

void check_component(std::span<const cplx> x, std::span<const cplx> g, double lambda,
                     double support_rel, double& max_violation, std::size_t& support) {
  const double cutoff = support_rel * norm_inf(x);
  max_violation = 0.0;
  support = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double mag = std::abs(x[j]);
    double v;
    if (mag > cutoff && mag > 0.0) {
      ++support;
      v = std::abs(g[j] - lambda * (x[j] / mag));
    } else {
      v = std::max(0.0, std::abs(g[j]) - lambda);
    }
    max_violation = std::max(max_violation, v);
  }
}

}  // namespace

CertificateReport optimality_certificate(const SeparationResult& result, const Signal& y,
                                         const FrameOperator& a1, const FrameOperator& a2,
                                         const SolverConfig& cfg, double tol, double support_rel) {
  (void)cfg;
  CertificateReport rep;
  rep.tolerance = tol;
  const std::size_t n = y.size();
  CVec y1(n), y2(n), r(n);
  a1.synthesize(result.x1.values, y1);
  a2.synthesize(result.x2.values, y2);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - y1[i] - y2[i];
  CVec g1(a1.coeff_dim()), g2(a2.coeff_dim());
  a1.analyze(r, g1);
  a2.analyze(r, g2);
  check_component(result.x1.values, g1, result.lambda1, support_rel, rep.max_violation1,
                  rep.support1);
  check_component(result.x2.values, g2, result.lambda2, support_rel, rep.max_violation2,
                  rep.support2);
  rep.max_violation = std::max(rep.max_violation1, rep.max_violation2);
  rep.passed = rep.max_violation <= tol;
  return rep;
}

std::vector<BatchItem> solve_mca_batch(std::span<const Signal> signals, const FrameOperator& a1,
                                       const FrameOperator& a2, const SolverConfig& cfg,
                                       std::size_t workers) {
  std::vector<BatchItem> out(signals.size());
  if (signals.empty()) return out;
  for (const auto& s : signals)
    if (s.size() != signals.front().size())
      throw InvalidDimension("solve_mca_batch: all signals must share one length");

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < signals.size(); i = next++) {
      try {
        out[i].result = solve_mca(signals[i], a1, a2, cfg);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, signals.size());
  if (threads == 1) {
    work();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  pool.clear();
  return out;
}

std::string to_string(SolverMode mode) { return mode == SolverMode::BP ? "bp" : "bpd"; }

SolverMode solver_mode_from_string(const std::string& s) {
  if (s == "bp" || s == "BP") return SolverMode::BP;
  if (s == "bpd" || s == "BPD") return SolverMode::BPD;
  throw InvalidParameter("unknown solver mode '" + s + "' (expected bp or bpd)");
}

nlohmann::json to_json(const SolverConfig& cfg) {
  nlohmann::json j;
  j["mode"] = to_string(cfg.mode);
  j["lambda1"] = cfg.lambda1;
  j["lambda2"] = cfg.lambda2;
  if (cfg.lambda_fraction) j["lambda_fraction"] = *cfg.lambda_fraction;
  else j["lambda_fraction"] = nullptr;
  j["mu"] = cfg.mu;
  j["max_iters"] = cfg.max_iters;
  j["residual_tol"] = cfg.residual_tol;
  j["report_sparse_iterate"] = cfg.report_sparse_iterate;
  j["record_objective"] = cfg.record_objective;
  return j;
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig cfg;
  try {
    if (j.contains("mode")) cfg.mode = solver_mode_from_string(j["mode"].get<std::string>());
    cfg.lambda1 = j.value("lambda1", cfg.lambda1);
    cfg.lambda2 = j.value("lambda2", cfg.lambda2);
    if (j.contains("lambda_fraction") && !j["lambda_fraction"].is_null())
      cfg.lambda_fraction = j["lambda_fraction"].get<double>();
    cfg.mu = j.value("mu", cfg.mu);
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.residual_tol = j.value("residual_tol", cfg.residual_tol);
    cfg.report_sparse_iterate = j.value("report_sparse_iterate", cfg.report_sparse_iterate);
    cfg.record_objective = j.value("record_objective", cfg.record_objective);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed solver config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace morphsep
