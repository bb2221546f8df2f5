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

#include "morphsep/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "morphsep/error.hpp"

namespace morphsep::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  return out;
}

double parse_double(std::string_view cell, const fs::path& path, std::size_t line) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r' || cell.back() == '\t'))
    cell.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw FormatError(path.string() + ":" + std::to_string(line) + ": bad number '" +
                      std::string(cell) + "'");
  return v;
}

}  // namespace

void write_signal_csv(const fs::path& path, const Signal& s) {
  auto out = open_out(path);
  out << "index,real,imag\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << i << ',' << format_double(s[i].real()) << ',' << format_double(s[i].imag()) << '\n';
  if (!out) throw FormatError("failed writing " + path.string());
}

CVec read_signal_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  CVec values;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (lineno == 1 && line.rfind("index", 0) == 0) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    for (auto pos = rest.find(','); pos != std::string_view::npos; pos = rest.find(',')) {
      cells.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    cells.push_back(rest);
    // index,real[,imag] or a bare value column
    double re = 0.0, im = 0.0;
    if (cells.size() == 1) {
      re = parse_double(cells[0], path, lineno);
    } else {
      const double idx = parse_double(cells[0], path, lineno);
      if (idx != static_cast<double>(values.size()))
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected index " +
                          std::to_string(values.size()));
      re = parse_double(cells[1], path, lineno);
      if (cells.size() > 2) im = parse_double(cells[2], path, lineno);
    }
    values.emplace_back(re, im);
  }
  if (values.empty()) throw FormatError(path.string() + " holds no samples");
  return values;
}

void write_signal(const fs::path& stem, const Signal& s, const std::vector<std::string>& labels) {
  fs::path csv = stem, meta = stem;
  csv += ".csv";
  meta += ".json";
  write_signal_csv(csv, s);
  write_json(meta, {{"sample_rate", s.sample_rate()}, {"N", s.size()}, {"labels", labels}});
}

Signal read_signal(const fs::path& path, double fallback_rate) {
  fs::path csv = path;
  if (csv.extension() != ".csv") csv += ".csv";
  fs::path meta = csv;
  meta.replace_extension(".json");
  double rate = fallback_rate;
  if (fs::exists(meta)) {
    const auto j = read_json(meta);
    if (j.contains("sample_rate")) rate = j["sample_rate"].get<double>();
  }
  if (!(rate > 0.0))
    throw FormatError("no sample rate for " + csv.string() + " (add " + meta.filename().string() +
                      " or pass one explicitly)");
  CVec v = read_signal_csv(csv);
  if (fs::exists(meta)) {
    const auto j = read_json(meta);
    if (j.contains("N") && j["N"].get<std::size_t>() != v.size())
      throw FormatError(csv.string() + " has " + std::to_string(v.size()) + " samples but " +
                        meta.filename().string() + " declares " + std::to_string(j["N"].get<std::size_t>()));
  }
  return Signal(std::move(v), rate);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("failed writing " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

namespace {

void write_coefficients(const fs::path& path, const CoefficientSet& c) {
  auto out = open_out(path);
  out << "flat_index,real,imag\n";
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (c.values[i] == cplx{}) continue;
    out << i << ',' << format_double(c.values[i].real()) << ',' << format_double(c.values[i].imag()) << '\n';
  }
}

std::size_t nonzeros(const CoefficientSet& c) {
  std::size_t k = 0;
  for (const auto& v : c.values) k += v != cplx{};
  return k;
}

}  // namespace

void write_separation(const fs::path& dir, const SeparationResult& r, const nlohmann::json& metrics,
                      bool with_coefficients) {
  fs::create_directories(dir);
  write_signal_csv(dir / "y1.csv", r.y1);
  write_signal_csv(dir / "y2.csv", r.y2);
  nlohmann::json m = metrics;
  m["iterations_run"] = r.iterations_run;
  m["final_residual"] = r.final_residual;
  m["relative_residual"] = r.relative_residual;
  m["lambda1"] = r.lambda1;
  m["lambda2"] = r.lambda2;
  m["sample_rate"] = r.y1.sample_rate();
  m["N"] = r.y1.size();
  m["x1"] = {{"frame", r.x1.frame_id}, {"shape", r.x1.shape}, {"nonzeros", nonzeros(r.x1)}};
  m["x2"] = {{"frame", r.x2.frame_id}, {"shape", r.x2.shape}, {"nonzeros", nonzeros(r.x2)}};
  if (!r.objective_trace.empty()) m["final_objective"] = r.objective_trace.back();
  write_json(dir / "metrics.json", m);
  if (!r.objective_trace.empty()) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(r.objective_trace.size());
    for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
      rows.push_back({std::to_string(i + 1), format_double(r.objective_trace[i])});
    write_table_csv(dir / "objective.csv", {"iteration", "objective"}, rows);
  }
  if (with_coefficients) {
    write_coefficients(dir / "x1.csv", r.x1);
    write_coefficients(dir / "x2.csv", r.x2);
  }
}

void write_grid_csv(const fs::path& path, const std::vector<double>& values, std::size_t rows,
                    std::size_t cols) {
  if (values.size() != rows * cols) throw InvalidDimension("grid shape does not match value count");
  auto out = open_out(path);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ',';
      out << format_double(values[r * cols + c]);
    }
    out << '\n';
  }
}

void write_table_csv(const fs::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

}  // namespace morphsep::io
