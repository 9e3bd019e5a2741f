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

#ifndef TDVPL_HAAR_THERMAL_HPP
#define TDVPL_HAAR_THERMAL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdvpl/hamiltonian.hpp"
#include "tdvpl/langevin.hpp"
#include "tdvpl/mps.hpp"

namespace tdvpl {

/// Samples of isometric MPS with Boltzmann weights e^{-beta E} (stored
/// relative to the lowest sampled energy, so the largest weight is 1).
struct WeightedEnsemble {
  std::vector<MpsState> samples;
  RealVector energies;
  RealVector weights;
  double beta = 0.0;
  int length = 0;
  std::string warning;  // non-empty when the effective sample size is small

  std::size_t size() const { return samples.size(); }
  double effective_sample_size() const;
};

/// Below this effective sample size the importance weights are flagged.
inline constexpr double kMinEffectiveSamples = 10.0;

/// Independent Haar samples with importance weights.
WeightedEnsemble sample_weighted_ensemble(const Mpo& hamiltonian, int length, Eigen::Index d_max, double beta,
                                          int count, Rng& rng);

struct MetropolisOptions {
  int burn_in_sweeps = 200;
  int sweeps_between_samples = 10;
  /// Probability of redrawing a whole tensor instead of rotating it.
  double redraw_probability = 0.1;
  double initial_step = 0.5;
};

/// Unit-weight samples from the same Boltzmann-weighted Haar measure, drawn
/// by a Metropolis chain. A move replaces one tensor either by a fresh Haar
/// isometry or by a random rotation of it; both proposals are symmetric
/// with respect to the Haar measure, so acceptance is min(1, e^{-beta dE}).
/// The rotation size adapts during burn-in only.
WeightedEnsemble sample_metropolis_ensemble(const Mpo& hamiltonian, int length, Eigen::Index d_max, double beta,
                                            int count, Rng& rng, const MetropolisOptions& options = {});

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Self-normalized weighted mean with a jackknife standard error.
Estimate weighted_mean(const RealVector& values, const RealVector& weights);
Estimate thermal_expectation(const WeightedEnsemble& ensemble, const std::function<double(const MpsState&)>& observable);
Estimate thermal_expectation(const WeightedEnsemble& ensemble, const Mpo& op);

enum class EnergyAxis { total, per_site };

struct Histogram {
  RealVector edges;    // bins + 1
  RealVector density;  // integrates to 1 over the edges
  EnergyAxis axis = EnergyAxis::total;
};

/// Weighted, normalized histogram. Without an explicit range the span of
/// the samples is used; a single distinct value yields one occupied bin.
Histogram energy_histogram(const RealVector& energies, const RealVector& weights, int bins, EnergyAxis axis,
                           int length, std::optional<std::pair<double, double>> range = std::nullopt);
Histogram energy_histogram(const WeightedEnsemble& ensemble, int bins, EnergyAxis axis = EnergyAxis::total,
                           std::optional<std::pair<double, double>> range = std::nullopt);

/// Two-sample Kolmogorov-Smirnov statistic between weighted samples.
double weighted_ks_statistic(const RealVector& x, const RealVector& wx, const RealVector& y, const RealVector& wy);
/// Asymptotic 5% critical value for sample sizes n and m.
double ks_critical_value(double n, double m);

struct FixedPointReport {
  std::vector<double> times;
  std::vector<double> statistic;
  std::vector<double> critical;
  std::vector<RealVector> energies;  // per requested time
};

/// Evolves every sample with langevin_step, noise seeded per sample from
/// `seed`, and compares the weighted energy distribution at each requested
/// time with the initial one.
FixedPointReport fixed_point_test(const Mpo& hamiltonian, const BathParams& bath, const WeightedEnsemble& ensemble,
                                  const std::vector<double>& times, const LangevinPlan& plan, std::uint64_t seed,
                                  int workers = 1);

}  // namespace tdvpl

#endif  // TDVPL_HAAR_THERMAL_HPP
