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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "morphsep/signal.hpp"
#include "morphsep/solver.hpp"

namespace morphsep::io {

namespace fs = std::filesystem;

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// CSV with header "index,real,imag", one row per sample.
void write_signal_csv(const fs::path& path, const Signal& s);
/// Reads the CSV above. The sample rate is not stored in the CSV.
CVec read_signal_csv(const fs::path& path);

/// A signal plus a JSON header {"sample_rate", "N", "labels"} next to it.
/// `stem` "out/y" produces out/y.csv and out/y.json.
void write_signal(const fs::path& stem, const Signal& s, const std::vector<std::string>& labels = {});
/// Reads `stem`.csv; the sample rate comes from `stem`.json when present,
/// otherwise from `fallback_rate` (which must then be positive).
Signal read_signal(const fs::path& path, double fallback_rate = 0.0);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

/// Writes y1.csv, y2.csv, x1/x2 support summaries and metrics.json into `dir`.
/// Coefficients are large for ESP frames, so they are only written when
/// `with_coefficients` is set (as long-format CSV of nonzero entries).
void write_separation(const fs::path& dir, const SeparationResult& r, const nlohmann::json& metrics,
                      bool with_coefficients = false);

/// Plain numeric grid, one row per line.
void write_grid_csv(const fs::path& path, const std::vector<double>& values, std::size_t rows,
                    std::size_t cols);

/// Writes a long-format CSV: header then rows of already formatted cells.
void write_table_csv(const fs::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

}  // namespace morphsep::io
