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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "morphsep/frame.hpp"
#include "morphsep/signal.hpp"

namespace morphsep {

enum class SolverMode {
  BP,   ///< min l1*|x1|_1 + l2*|x2|_1  s.t.  y = A1 x1 + A2 x2
  BPD,  ///< min l1*|x1|_1 + l2*|x2|_1 + 1/2 |y - A1 x1 - A2 x2|^2
};

struct SolverConfig {
  SolverMode mode = SolverMode::BPD;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  /// When set, both weights are this fraction of lambda_max(y), resolved per
  /// signal. Overrides lambda1/lambda2.
  std::optional<double> lambda_fraction;
  /// ADMM penalty. The fixed point does not depend on it; convergence speed does.
  double mu = 1.0;
  std::size_t max_iters = 1000;
  /// Early exit once the relative internal residual changes by less than
  /// this over 10 iterations. Zero runs the full budget.
  double residual_tol = 0.0;
  /// Keep the thresholded iterates u1/u2 in the result.
  bool report_sparse_iterate = false;
  bool record_objective = true;

  void validate() const;
};

struct SeparationResult {
  Signal y1;  ///< A1 x1
  Signal y2;  ///< A2 x2
  CoefficientSet x1, x2;
  CoefficientSet u1, u2;  ///< empty unless report_sparse_iterate
  std::size_t iterations_run = 0;
  double final_residual = 0.0;  ///< ||y - y1 - y2||
  double relative_residual = 0.0;
  double lambda1 = 0.0;  ///< weights actually used
  double lambda2 = 0.0;
  std::vector<double> objective_trace;  ///< BPD objective per iteration
};

/// max(||A1* y||_inf, ||A2* y||_inf), raised by a relative 1e-12: every
/// common weight at or above this gives the all-zero BPD solution, also in
/// floating point.
double lambda_max(const Signal& y, const FrameOperator& a1, const FrameOperator& a2);

/// Two-component separation by split augmented Lagrangian shrinkage:
///
///   x_i = A_i* y, d_i = 0
///   repeat
///     u_i = soft(x_i + d_i, lambda_i / mu)
///     v_i = u_i - d_i
///     c   = y - A1 v1 - A2 v2
///     d_i = alpha A_i* c
///     x_i = d_i + v_i
///   y_i = A_i x_i
///
/// with alpha = 1/(p1 + p2) for BP and 1/(mu + p1 + p2) for BPD.
/// Throws NumericalDivergence if an iterate becomes non-finite.
SeparationResult solve_mca(const Signal& y, const FrameOperator& a1, const FrameOperator& a2,
                           const SolverConfig& cfg);

struct CertificateReport {
  double max_violation = 0.0;
  double max_violation1 = 0.0;
  double max_violation2 = 0.0;
  std::size_t support1 = 0;
  std::size_t support2 = 0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Checks BPD stationarity of `result`: with r = y - A1 x1 - A2 x2, every
/// coefficient must satisfy |[A_i* r]_j| <= lambda_i, and on the support of
/// x_i, [A_i* r]_j = lambda_i x_j / |x_j|. A coefficient belongs to the support
/// when |x_j| > support_rel * max|x_i|. Never throws on violations; they are
/// reported.
CertificateReport optimality_certificate(const SeparationResult& result, const Signal& y,
                                         const FrameOperator& a1, const FrameOperator& a2,
                                         const SolverConfig& cfg, double tol,
                                         double support_rel = 1e-6);

struct BatchItem {
  std::optional<SeparationResult> result;
  std::string error;
  bool ok() const noexcept { return result.has_value(); }
};

/// Solves independent problems on up to `workers` threads. Output order
/// matches input order and every result equals the sequential one bit for
/// bit. A failing signal is reported in its slot without stopping the others.
std::vector<BatchItem> solve_mca_batch(std::span<const Signal> signals, const FrameOperator& a1,
                                       const FrameOperator& a2, const SolverConfig& cfg,
                                       std::size_t workers);

nlohmann::json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const nlohmann::json& j);
std::string to_string(SolverMode mode);
SolverMode solver_mode_from_string(const std::string& s);

}  // namespace morphsep
