// Copyright 2026 The tdvp-langevin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TDVPL_ANALYSIS_HPP
#define TDVPL_ANALYSIS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tdvpl/runner.hpp"

namespace tdvpl {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct GrowthRateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  double residual = 0.0;  // root mean square
};

/// Least-squares line through S(t) on [t0, t0 + window]. The default window
/// runs to the last sample.
GrowthRateFit growth_rate(const std::vector<double>& times, const std::vector<double>& entropy, double t0 = 4.0,
                          std::optional<double> window = std::nullopt);

struct SaturationEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
};

/// Mean of S over the last fraction of the simulated time span.
SaturationEstimate saturation(const std::vector<double>& times, const std::vector<double>& entropy,
                              double fraction = 0.2);

struct CriticalCoupling {
  Eigen::Index bond_dim = 0;
  std::string parameter;
  std::optional<double> value;  // empty: not reached on the grid
  double tolerance = 0.05;
};

/// curves[k][i] is S-bar at bond_dims[k] and grid[i]; the last curve is the
/// reference. The grid must be strictly ascending.
std::vector<CriticalCoupling> critical_coupling(const std::vector<double>& grid,
                                                const std::vector<Eigen::Index>& bond_dims,
                                                const std::vector<std::vector<double>>& curves,
                                                const std::string& parameter, double tolerance = 0.05);

enum class TStarCriterion { entropy, fidelity };
std::string to_string(TStarCriterion c);

struct TStar {
  Eigen::Index bond_dim = 0;
  TStarCriterion criterion = TStarCriterion::entropy;
  double epsilon = 0.05;
  double value = kUnbounded;
  bool bounded() const { return value != kUnbounded; }
};

struct TStarPair {
  TStar entropy;
  TStar fidelity;
};

inline constexpr double kEntropyGate = 1e-3;

/// First snapshot at which the record leaves the reference. The fidelity
/// criterion reads the record's overlap_ref column.
TStarPair t_star(const TrajectoryRecord& record, const TrajectoryRecord& reference, double epsilon = 0.05,
                 double entropy_gate = kEntropyGate);

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

struct Interval {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Percentile bootstrap of a statistic; level is the central coverage.
Interval bootstrap(const std::vector<double>& values, const std::function<double(const std::vector<double>&)>& statistic,
                   std::uint64_t seed, int resamples = 1000, double level = 0.68);

struct AnalysisOptions {
  double t0 = 4.0;
  std::optional<double> window;
  double saturation_fraction = 0.2;
  double tolerance = 0.05;
  double epsilon = 0.05;
  double entropy_gate = kEntropyGate;
  int resamples = 1000;
  std::uint64_t seed = 7;
};

/// Reads a finished run directory and writes growth_rates.csv,
/// saturation.csv, critical.csv, tstar.csv and tstar_summary.csv next to it.
void analyze_run(const std::filesystem::path& run, const AnalysisOptions& options = {});

}  // namespace tdvpl

#endif  // TDVPL_ANALYSIS_HPP
