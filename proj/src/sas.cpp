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

#include "morphsep/sas.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

#include "morphsep/error.hpp"
#include "morphsep/fft.hpp"
#include "morphsep/io.hpp"

namespace morphsep::sas {

namespace fs = std::filesystem;

std::size_t CircularScan::samples() const { return series.empty() ? 0 : series.front().size(); }

double CircularScan::sample_rate() const {
  if (series.empty()) throw InvalidDimension("scan holds no time series");
  return series.front().sample_rate();
}

void CircularScan::validate() const {
  if (angles.empty()) throw InvalidDimension("scan has no angles");
  if (angles.size() != series.size())
    throw InvalidDimension("scan has " + std::to_string(angles.size()) + " angles but " +
                           std::to_string(series.size()) + " time series");
  for (std::size_t i = 1; i < angles.size(); ++i)
    if (!(angles[i] > angles[i - 1]))
      throw FormatError("scan angles must be strictly increasing (angle " + io::format_double(angles[i]) +
                        " follows " + io::format_double(angles[i - 1]) + ")");
  const std::size_t n = series.front().size();
  const double fs = series.front().sample_rate();
  std::string bad;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i].size() != n || series[i].sample_rate() != fs)
      bad += (bad.empty() ? "" : ", ") + io::format_double(angles[i]);
  if (!bad.empty())
    throw FormatError("time series length or sample rate differs from the first angle at angles: " + bad);
  if (!(geometry.sound_speed > 0.0) || !(geometry.standoff_distance > 0.0))
    throw InvalidParameter("scan geometry needs positive sound speed and standoff distance");
  if (!(window_end > window_start)) throw InvalidParameter("scan window end must exceed its start");
}

CircularScan make_scan(std::vector<double> angles, std::vector<Signal> series, ScanGeometry geometry,
                       double window_start, std::optional<double> window_end) {
  CircularScan scan{std::move(angles), std::move(series), geometry, window_start, 0.0};
  if (scan.series.empty()) throw InvalidDimension("scan has no time series");
  scan.window_end = window_end ? *window_end
                               : window_start + static_cast<double>(scan.samples()) / scan.sample_rate();
  scan.validate();
  return scan;
}

CircularScan scan_zeros_like(const CircularScan& scan) {
  CircularScan out = scan;
  for (auto& s : out.series) s = Signal::zeros(s.size(), s.sample_rate());
  return out;
}

CircularScan operator+(const CircularScan& a, const CircularScan& b) {
  if (a.angles != b.angles || a.samples() != b.samples())
    throw InvalidDimension("cannot add scans with different angles or lengths");
  CircularScan out = a;
  for (std::size_t i = 0; i < out.series.size(); ++i) out.series[i] += b.series[i];
  return out;
}

CircularScan operator*(const CircularScan& a, double c) {
  CircularScan out = a;
  for (auto& s : out.series) s *= c;
  return out;
}

namespace {

std::string default_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "angle_%04zu.csv", i);
  return buf;
}

}  // namespace

CircularScan ingest_scan(const fs::path& path) {
  const fs::path manifest = fs::is_directory(path) ? path / "scan.json" : path;
  const fs::path dir = manifest.parent_path();
  const auto j = io::read_json(manifest);
  CircularScan scan;
  double fs_rate = 0.0, origin = 0.0;
  std::vector<std::string> files;
  try {
    scan.geometry.sound_speed = j.at("sound_speed").get<double>();
    scan.geometry.standoff_distance = j.at("standoff_distance").get<double>();
    fs_rate = j.at("sample_rate").get<double>();
    const auto& w = j.at("window");
    if (!w.is_array() || w.size() != 2) throw FormatError("scan window must be [t0, t1]");
    scan.window_start = w[0].get<double>();
    scan.window_end = w[1].get<double>();
    scan.angles = j.at("angles").get<std::vector<double>>();
    origin = j.value("time_origin", scan.window_start);
    if (j.contains("files")) files = j["files"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest.string() + ": " + e.what());
  }
  if (!(fs_rate > 0.0)) throw FormatError("scan sample_rate must be positive");
  if (scan.angles.empty()) throw FormatError("scan manifest lists no angles");
  if (!files.empty() && files.size() != scan.angles.size())
    throw FormatError("scan manifest lists " + std::to_string(files.size()) + " files for " +
                      std::to_string(scan.angles.size()) + " angles");

  std::string missing;
  std::vector<CVec> raw;
  for (std::size_t i = 0; i < scan.angles.size(); ++i) {
    const fs::path file = dir / (files.empty() ? default_file_name(i) : files[i]);
    if (!fs::exists(file)) {
      missing += (missing.empty() ? "" : ", ") + io::format_double(scan.angles[i]) + " (" +
                 file.filename().string() + ")";
      continue;
    }
    raw.push_back(io::read_signal_csv(file));
  }
  if (!missing.empty()) throw FormatError("scan is missing data for angles: " + missing);

  std::string uneven;
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (raw[i].size() != raw.front().size())
      uneven += (uneven.empty() ? "" : ", ") + io::format_double(scan.angles[i]) + " (" +
                std::to_string(raw[i].size()) + " samples)";
  if (!uneven.empty())
    throw FormatError("time series lengths differ from the first angle (" +
                      std::to_string(raw.front().size()) + " samples) at angles: " + uneven);

  const auto [lo, hi] = interval_indices({scan.window_start, scan.window_end}, fs_rate,
                                         raw.front().size(), origin);
  for (auto& r : raw)
    scan.series.emplace_back(CVec(r.begin() + static_cast<std::ptrdiff_t>(lo),
                                  r.begin() + static_cast<std::ptrdiff_t>(hi)),
                             fs_rate);
  // Sample 0 now sits at the first retained time.
  scan.window_start = origin + static_cast<double>(lo) / fs_rate;
  scan.validate();
  return scan;
}

void export_scan(const CircularScan& scan, const fs::path& dir) {
  scan.validate();
  fs::create_directories(dir);
  nlohmann::json j;
  j["sound_speed"] = scan.geometry.sound_speed;
  j["standoff_distance"] = scan.geometry.standoff_distance;
  j["sample_rate"] = scan.sample_rate();
  j["window"] = {scan.window_start, scan.window_end};
  j["time_origin"] = scan.window_start;
  j["angles"] = scan.angles;
  std::vector<std::string> files;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    files.push_back(default_file_name(i));
    io::write_signal_csv(dir / files.back(), scan.series[i]);
  }
  j["files"] = files;
  io::write_json(dir / "scan.json", j);
}

ScanSeparation separate_scan(const CircularScan& scan, const FrameOperator& a1,
                             const FrameOperator& a2, const SolverConfig& cfg, const Interval& i1,
                             const Interval& i2, std::size_t workers, const CircularScan* reference) {
  scan.validate();
  if (reference && (reference->angles != scan.angles || reference->samples() != scan.samples()))
    throw InvalidDimension("reference scan does not match the scan being separated");
  const auto batch = solve_mca_batch(scan.series, a1, a2, cfg, workers);

  ScanSeparation out{scan_zeros_like(scan), scan_zeros_like(scan), {}, {}};
  out.metrics.resize(scan.size());
  out.errors.resize(scan.size());
  double s1 = 0.0, s2 = 0.0;
  std::vector<double> m1s, m2s;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (!batch[i].ok()) {
      out.errors[i] = batch[i].error;
      ++out.failures;
      continue;
    }
    out.short_scan.series[i] = batch[i].result->y1;
    out.long_scan.series[i] = batch[i].result->y2;
    const Signal& ref = reference ? reference->series[i] : scan.series[i];
    try {
      out.metrics[i] = interval_errors(scan.series[i], out.short_scan.series[i],
                                       out.long_scan.series[i], i1, i2, &ref, scan.window_start);
      m1s.push_back(out.metrics[i]->m1);
      m2s.push_back(out.metrics[i]->m2);
      s1 += out.metrics[i]->m1;
      s2 += out.metrics[i]->m2;
    } catch (const UndefinedMetric&) {
      // Zero-energy reference on an interval: no metric for this angle.
    }
  }
  out.metric_count = m1s.size();
  if (out.metric_count > 0) {
    const double k = static_cast<double>(out.metric_count);
    out.mean_m1 = s1 / k;
    out.mean_m2 = s2 / k;
    if (out.metric_count > 1) {
      double v1 = 0.0, v2 = 0.0;
      for (std::size_t i = 0; i < m1s.size(); ++i) {
        v1 += (m1s[i] - out.mean_m1) * (m1s[i] - out.mean_m1);
        v2 += (m2s[i] - out.mean_m2) * (m2s[i] - out.mean_m2);
      }
      out.std_m1 = std::sqrt(v1 / (k - 1.0));
      out.std_m2 = std::sqrt(v2 / (k - 1.0));
    }
  }
  return out;
}

GridSpec GridSpec::centered(double half_extent, std::size_t pixels) {
  GridSpec g;
  g.nx = g.ny = pixels;
  g.x_min = g.y_min = -half_extent;
  g.x_max = g.y_max = half_extent;
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (nx == 0 || ny == 0) throw InvalidDimension("image grid needs at least one pixel per axis");
  if (!(x_max > x_min) || !(y_max > y_min)) throw InvalidParameter("image grid extent is empty");
}

std::vector<double> SasImage::magnitude() const {
  std::vector<double> m(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) m[i] = std::abs(pixels[i]);
  return m;
}

namespace {

// Analytic signal: negative frequencies removed, positive ones doubled.
CVec analytic_signal(const Signal& s) {
  const std::size_t n = s.size();
  CVec spec = fft::forward(s.samples());
  for (std::size_t j = 1; j < n; ++j) {
    if (2 * j < n) spec[j] *= 2.0;
    else if (2 * j > n) spec[j] = 0.0;
  }
  CVec out = fft::backward(spec);
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= inv;
  return out;
}

}  // namespace

SasImage backproject(const CircularScan& scan, const GridSpec& grid) {
  scan.validate();
  grid.validate();
  SasImage img{grid.nx, grid.ny, grid.x_min, grid.x_max, grid.y_min, grid.y_max,
               CVec(grid.nx * grid.ny, cplx{})};
  const double fs = scan.sample_rate();
  const std::size_t n = scan.samples();
  std::vector<CVec> data;
  data.reserve(scan.size());
  for (const auto& s : scan.series) data.push_back(grid.analytic ? analytic_signal(s) : s.vec());

  const double two_over_c = 2.0 / scan.geometry.sound_speed;
  const auto rows = static_cast<long long>(grid.ny);
  // Each pixel sums its angles in scan order, so the result is independent of threading.
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < rows; ++r) {
    const auto iy = static_cast<std::size_t>(r);
    const double py = img.y_at(iy);
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const double px = img.x_at(ix);
      cplx acc{};
      for (std::size_t a = 0; a < scan.size(); ++a) {
        const double th = scan.angles[a] * std::numbers::pi / 180.0;
        const double sx = scan.geometry.standoff_distance * std::cos(th);
        const double sy = scan.geometry.standoff_distance * std::sin(th);
        const double t = two_over_c * std::hypot(px - sx, py - sy);
        const double f = (t - scan.window_start) * fs;
        if (!(f >= 0.0) || f > static_cast<double>(n - 1)) continue;
        const auto i0 = static_cast<std::size_t>(f);
        const double w = f - static_cast<double>(i0);
        const cplx v0 = data[a][i0];
        const cplx v1 = i0 + 1 < n ? data[a][i0 + 1] : v0;
        acc += (1.0 - w) * v0 + w * v1;
      }
      img.pixels[iy * grid.nx + ix] = acc;
    }
  }
  return img;
}

TargetStrength normalized_target_strength(const CircularScan& scan, NtsNormalization mode,
                                          double floor_db) {
  scan.validate();
  const std::size_t n = scan.samples();
  const std::size_t bins = n / 2 + 1;
  const std::size_t na = scan.size();
  const double fs = scan.sample_rate();
  TargetStrength out;
  out.angles = scan.angles;
  out.frequencies.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) out.frequencies[k] = static_cast<double>(k) * fs / static_cast<double>(n);
  std::vector<double> mag(bins * na);
  for (std::size_t a = 0; a < na; ++a) {
    const CVec spec = fft::forward(scan.series[a].samples());
    for (std::size_t k = 0; k < bins; ++k) mag[k * na + a] = std::abs(spec[k]);
  }
  const double global = *std::max_element(mag.begin(), mag.end());
  if (!(global > 0.0)) throw UndefinedMetric("target strength of an all-zero scan is undefined");
  out.db.resize(mag.size());
  for (std::size_t k = 0; k < bins; ++k) {
    double norm_by = global;
    if (mode == NtsNormalization::PerFrequency)
      norm_by = *std::max_element(mag.begin() + static_cast<std::ptrdiff_t>(k * na),
                                  mag.begin() + static_cast<std::ptrdiff_t>((k + 1) * na));
    for (std::size_t a = 0; a < na; ++a) {
      const double v = mag[k * na + a];
      out.db[k * na + a] = v > 0.0 && norm_by > 0.0 ? std::max(floor_db, 20.0 * std::log10(v / norm_by))
                                                    : floor_db;
    }
  }
  return out;
}

std::vector<double> k_space(const SasImage& image) {
  const CVec spec = fft::forward_2d(image.pixels, image.ny, image.nx);
  std::vector<double> out(spec.size());
  // fftshift: DC moves to (ny/2, nx/2).
  for (std::size_t r = 0; r < image.ny; ++r)
    for (std::size_t c = 0; c < image.nx; ++c) {
      const std::size_t rr = (r + image.ny / 2) % image.ny;
      const std::size_t cc = (c + image.nx / 2) % image.nx;
      out[rr * image.nx + cc] = std::abs(spec[r * image.nx + c]);
    }
  return out;
}

double gaussian_pulse(double t, double centre_frequency, double width) {
  const double u = t / width;
  return std::exp(-0.5 * u * u) * std::cos(2.0 * std::numbers::pi * centre_frequency * t);
}

SceneScans desk_scene(const DeskSceneSpec& spec) {
  if (spec.angle_count == 0) throw InvalidParameter("desk scene needs at least one angle");
  if (!(spec.window_end > spec.window_start)) throw InvalidParameter("scene window is empty");
  const auto n = static_cast<std::size_t>(std::llround((spec.window_end - spec.window_start) * spec.sample_rate));
  // Move the specular pulse to the two-way travel time to the rotation centre.
  const double arrival = 2.0 * spec.geometry.standoff_distance / spec.geometry.sound_speed;
  const double specular = spec.target.pulse ? spec.target.pulse->arrival : 1e-3;
  const double shift = arrival - spec.window_start - specular;

  std::vector<double> angles;
  std::vector<Signal> mix, shorts, longs;
  for (std::size_t a = 0; a < spec.angle_count; ++a) {
    const double deg = 360.0 * static_cast<double>(a) / static_cast<double>(spec.angle_count);
    const double th = deg * std::numbers::pi / 180.0;
    SyntheticTargetSpec t = spec.target;
    t.n = n;
    t.sample_rate = spec.sample_rate;
    if (t.pulse) {
      t.pulse->arrival += shift;
      t.pulse->amplitude *= 1.0 + 0.3 * std::cos(2.0 * th);
    }
    for (auto& w : t.wavepackets) w.arrival += shift;
    for (std::size_t r = 0; r < t.resonances.size(); ++r) {
      auto& res = t.resonances[r];
      res.start += shift;
      res.amplitude *= 0.6 + 0.4 * std::cos(static_cast<double>(r + 1) * th);
    }
    const Decomposition d = synthetic_elastic_target(t);
    Signal s = lfm_process(d.short_part, spec.processing).clean;
    Signal l = lfm_process(d.long_part, spec.processing).clean;
    Signal m = spec.snr_db ? lfm_process(d.mixture, spec.processing, spec.snr_db, spec.seed + a).noisy
                           : s + l;
    angles.push_back(deg);
    mix.push_back(std::move(m));
    shorts.push_back(std::move(s));
    longs.push_back(std::move(l));
  }
  return {make_scan(angles, std::move(mix), spec.geometry, spec.window_start, spec.window_end),
          make_scan(angles, std::move(shorts), spec.geometry, spec.window_start, spec.window_end),
          make_scan(angles, std::move(longs), spec.geometry, spec.window_start, spec.window_end)};
}

nlohmann::json to_json(const GridSpec& g) {
  return {{"nx", g.nx},       {"ny", g.ny},       {"x_min", g.x_min},       {"x_max", g.x_max},
          {"y_min", g.y_min}, {"y_max", g.y_max}, {"analytic", g.analytic}};
}

GridSpec grid_spec_from_json(const nlohmann::json& j) {
  GridSpec g;
  try {
    if (j.contains("half_extent")) g = GridSpec::centered(j["half_extent"].get<double>(), j.value("pixels", g.nx));
    g.nx = j.value("nx", g.nx);
    g.ny = j.value("ny", g.ny);
    g.x_min = j.value("x_min", g.x_min);
    g.x_max = j.value("x_max", g.x_max);
    g.y_min = j.value("y_min", g.y_min);
    g.y_max = j.value("y_max", g.y_max);
    g.analytic = j.value("analytic", g.analytic);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed grid spec: ") + e.what());
  }
  g.validate();
  return g;
}

void export_image(const SasImage& image, const fs::path& stem) {
  fs::path grid = stem, meta = stem;
  grid += "_magnitude.csv";
  meta += ".json";
  io::write_grid_csv(grid, image.magnitude(), image.ny, image.nx);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(image.pixels.size());
  for (std::size_t iy = 0; iy < image.ny; ++iy)
    for (std::size_t ix = 0; ix < image.nx; ++ix)
      rows.push_back({std::to_string(ix), std::to_string(iy), io::format_double(image.at(ix, iy).real()),
                      io::format_double(image.at(ix, iy).imag())});
  fs::path cplx_path = stem;
  cplx_path += "_complex.csv";
  io::write_table_csv(cplx_path, {"ix", "iy", "real", "imag"}, rows);
  io::write_json(meta, {{"nx", image.nx},
                        {"ny", image.ny},
                        {"x_min", image.x_min},
                        {"x_max", image.x_max},
                        {"y_min", image.y_min},
                        {"y_max", image.y_max},
                        {"dx", image.dx()},
                        {"dy", image.dy()},
                        {"rows", "y"},
                        {"columns", "x"}});
}

}  // namespace morphsep::sas
