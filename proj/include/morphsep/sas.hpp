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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "morphsep/frame.hpp"
#include "morphsep/signal.hpp"
#include "morphsep/signal_lab.hpp"
#include "morphsep/solver.hpp"

namespace morphsep::sas {

struct ScanGeometry {
  double standoff_distance = 0.75;  ///< m, transducer to rotation centre
  double sound_speed = 343.0;      ///< m/s
};

/// Angle-indexed time series from a circular aperture. Sample n of every
/// series is taken at time window_start + n / sample_rate.
struct CircularScan {
  std::vector<double> angles;  ///< degrees, strictly increasing
  std::vector<Signal> series;
  ScanGeometry geometry;
  double window_start = 0.0;
  double window_end = 0.0;

  std::size_t size() const noexcept { return angles.size(); }
  std::size_t samples() const;
  double sample_rate() const;
  void validate() const;
};

/// Builds and validates a scan; the window end defaults to the end of the data.
CircularScan make_scan(std::vector<double> angles, std::vector<Signal> series, ScanGeometry geometry,
                       double window_start = 0.0, std::optional<double> window_end = std::nullopt);

CircularScan scan_zeros_like(const CircularScan& scan);
CircularScan operator+(const CircularScan& a, const CircularScan& b);
CircularScan operator*(const CircularScan& a, double c);

// On-disk layout: a directory holding scan.json
//   {"sound_speed", "standoff_distance", "sample_rate", "window": [t0, t1],
//    "angles": [...], "files": [...] (optional), "time_origin": t (optional)}
// and one CSV per angle (index, real, imag), by default angle_0000.csv,
// angle_0001.csv, ... in angle order. time_origin is the time of sample 0
// in the files (default t0); ingest keeps only samples inside the window.
CircularScan ingest_scan(const std::filesystem::path& path);
void export_scan(const CircularScan& scan, const std::filesystem::path& dir);

struct ScanSeparation {
  CircularScan short_scan;
  CircularScan long_scan;
  /// Per-angle metrics; empty where the angle failed or a metric was undefined.
  std::vector<std::optional<IntervalMetrics>> metrics;
  std::vector<std::string> errors;  ///< per angle, empty on success
  double mean_m1 = 0.0, std_m1 = 0.0;
  double mean_m2 = 0.0, std_m2 = 0.0;
  std::size_t metric_count = 0;
  std::size_t failures = 0;
};

/// Separates every angle independently. Metrics use the intervals in
/// absolute time and are measured against `reference` when given (for
/// example the clean scan), otherwise against the input scan itself.
ScanSeparation separate_scan(const CircularScan& scan, const FrameOperator& a1,
                             const FrameOperator& a2, const SolverConfig& cfg,
                             const Interval& i1 = kImagingEarly, const Interval& i2 = kImagingLate,
                             std::size_t workers = 1, const CircularScan* reference = nullptr);

struct GridSpec {
  std::size_t nx = 128;
  std::size_t ny = 128;
  double x_min = -0.2, x_max = 0.2;
  double y_min = -0.2, y_max = 0.2;
  /// Backproject the analytic signal, so the image magnitude is an envelope.
  bool analytic = true;

  static GridSpec centered(double half_extent, std::size_t pixels = 128);
  void validate() const;
};

/// Complex image on pixel centres; row-major with y along rows.
struct SasImage {
  std::size_t nx = 0, ny = 0;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  CVec pixels;

  double dx() const noexcept { return (x_max - x_min) / static_cast<double>(nx); }
  double dy() const noexcept { return (y_max - y_min) / static_cast<double>(ny); }
  double x_at(std::size_t ix) const noexcept { return x_min + (static_cast<double>(ix) + 0.5) * dx(); }
  double y_at(std::size_t iy) const noexcept { return y_min + (static_cast<double>(iy) + 0.5) * dy(); }
  cplx at(std::size_t ix, std::size_t iy) const { return pixels[iy * nx + ix]; }
  std::vector<double> magnitude() const;
};

/// Delay-and-sum image. The sensor for angle a sits at
/// R (cos a, sin a); pixel p takes the linearly interpolated sample at the
/// two-way time 2 |p - s| / c. Times outside the window contribute zero.
SasImage backproject(const CircularScan& scan, const GridSpec& grid);

enum class NtsNormalization { Global, PerFrequency };

/// Per-angle magnitude spectra in dB, frequency along rows.
struct TargetStrength {
  std::vector<double> frequencies;  ///< Hz, bins 0 .. N/2
  std::vector<double> angles;
  std::vector<double> db;           ///< frequencies.size() x angles.size()
};

/// Zero bins are clamped to `floor_db`.
TargetStrength normalized_target_strength(const CircularScan& scan,
                                          NtsNormalization mode = NtsNormalization::Global,
                                          double floor_db = -200.0);

/// Centred |2-D DFT| of the complex image, same shape as the image.
std::vector<double> k_space(const SasImage& image);

struct PointScatterer {
  double x = 0.0, y = 0.0;
  double amplitude = 1.0;
};

/// Forward model: each scatterer returns `pulse` delayed by its two-way
/// travel time, sampled on the scan window. `pulse` is a function of time
/// relative to the arrival.
template <typename Pulse>
CircularScan synthesize_point_scan(const std::vector<PointScatterer>& scatterers,
                                   const std::vector<double>& angles, const ScanGeometry& geometry,
                                   double sample_rate, double window_start, double window_end,
                                   Pulse&& pulse);

/// Gaussian-windowed cosine, a stand-in for a compressed pulse.
double gaussian_pulse(double t, double centre_frequency, double width);

/// Desk-scale synthetic scan: the elastic target at the rotation centre, its
/// echo delayed by the two-way travel time and passed through the LFM chain.
/// The specular pulse amplitude and resonance amplitudes vary smoothly with
/// angle. Returns the mixture plus exact short and long components.
struct SceneScans {
  CircularScan mixture;
  CircularScan short_truth;
  CircularScan long_truth;
};

struct DeskSceneSpec {
  std::size_t angle_count = 8;
  ScanGeometry geometry{0.75, 343.0};
  double sample_rate = 100e3;
  double window_start = 3e-3;
  double window_end = 8e-3;
  SyntheticTargetSpec target = SyntheticTargetSpec::desk_default();
  LfmProcessing processing{};
  std::optional<double> snr_db;
  std::uint64_t seed = 1;
};

SceneScans desk_scene(const DeskSceneSpec& spec);

nlohmann::json to_json(const GridSpec& g);
GridSpec grid_spec_from_json(const nlohmann::json& j);
void export_image(const SasImage& image, const std::filesystem::path& stem);

// ---------------------------------------------------------------------------

template <typename Pulse>
CircularScan synthesize_point_scan(const std::vector<PointScatterer>& scatterers,
                                   const std::vector<double>& angles, const ScanGeometry& geometry,
                                   double sample_rate, double window_start, double window_end,
                                   Pulse&& pulse) {
  const auto n = static_cast<std::size_t>((window_end - window_start) * sample_rate + 0.5);
  std::vector<Signal> series;
  series.reserve(angles.size());
  for (double deg : angles) {
    const double a = deg * 3.14159265358979323846 / 180.0;
    const double sx = geometry.standoff_distance * std::cos(a);
    const double sy = geometry.standoff_distance * std::sin(a);
    Signal s = Signal::zeros(n, sample_rate);
    for (const auto& p : scatterers) {
      const double delay = 2.0 * std::hypot(p.x - sx, p.y - sy) / geometry.sound_speed;
      for (std::size_t i = 0; i < n; ++i)
        s[i] += p.amplitude * pulse(window_start + static_cast<double>(i) / sample_rate - delay);
    }
    series.push_back(std::move(s));
  }
  return make_scan(angles, std::move(series), geometry, window_start, window_end);
}

}  // namespace morphsep::sas
