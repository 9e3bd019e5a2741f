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

#include "tdvpl/haar_thermal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tdvpl/errors.hpp"
#include "tdvpl/hashing.hpp"
#include "tdvpl/linalg.hpp"
#include "tdvpl/parallel.hpp"

namespace tdvpl {

double WeightedEnsemble::effective_sample_size() const {
  const double s = weights.sum();
  const double s2 = weights.squaredNorm();
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

namespace {

RealVector boltzmann_weights(const RealVector& energies, double beta) {
  if (beta == 0.0) return RealVector::Ones(energies.size());
  const double e_min = energies.minCoeff();
  return (-beta * (energies.array() - e_min)).exp().matrix();
}

void flag_effective_size(WeightedEnsemble& ensemble) {
  const double n_eff = ensemble.effective_sample_size();
  if (n_eff < kMinEffectiveSamples) {
    std::ostringstream msg;
    msg << "effective sample size " << n_eff << " < " << kMinEffectiveSamples << " at beta = " << ensemble.beta
        << "; importance weights are degenerate";
    ensemble.warning = msg.str();
  }
}

}  // namespace

WeightedEnsemble sample_weighted_ensemble(const Mpo& hamiltonian, int length, Eigen::Index d_max, double beta,
                                          int count, Rng& rng) {
  require(count >= 1, "sample_weighted_ensemble: need at least one sample");
  require(beta >= 0.0, "sample_weighted_ensemble: beta must be non-negative");
  WeightedEnsemble out;
  out.beta = beta;
  out.length = length;
  out.energies.resize(count);
  for (int i = 0; i < count; ++i) {
    out.samples.push_back(haar_random_mps(length, d_max, rng));
    out.energies(i) = energy(out.samples.back(), hamiltonian);
  }
  out.weights = boltzmann_weights(out.energies, beta);
  flag_effective_size(out);
  return out;
}

WeightedEnsemble sample_metropolis_ensemble(const Mpo& hamiltonian, int length, Eigen::Index d_max, double beta,
                                            int count, Rng& rng, const MetropolisOptions& options) {
  require(count >= 1, "sample_metropolis_ensemble: need at least one sample");
  require(beta >= 0.0, "sample_metropolis_ensemble: beta must be non-negative");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<int> pick_site(0, length - 1);
  std::normal_distribution<double> normal;

  MpsState state = haar_random_mps(length, d_max, rng);
  double e = energy(state, hamiltonian);
  double step = options.initial_step;

  auto sweep = [&] {
    int accepted = 0;
    for (int k = 0; k < length; ++k) {
      const int n = pick_site(rng);
      const SiteTensor old = state.site(n);
      const Eigen::Index rows = kPhysDim * old.left();
      Matrix proposal;
      if (uniform(rng) < options.redraw_probability) {
        proposal = haar_isometry(rows, old.right(), rng);
      } else {
        Matrix g(rows, rows);
        for (Eigen::Index j = 0; j < rows; ++j) {
          for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = Complex(normal(rng), normal(rng));
        }
        g = 0.5 * (g + g.adjoint()).eval();
        proposal = expm_i_hermitian(g, step) * old.left_grouped();
      }
      state.site(n) = SiteTensor::from_left_grouped(proposal, old.left());
      const double e_new = energy(state, hamiltonian);
      if (uniform(rng) < std::exp(-beta * (e_new - e))) {
        e = e_new;
        ++accepted;
      } else {
        state.site(n) = old;
      }
    }
    return static_cast<double>(accepted) / length;
  };

  for (int s = 0; s < options.burn_in_sweeps; ++s) {
    const double rate = sweep();
    step = std::clamp(step * std::exp(rate - 0.4), 1e-3, 3.0);
  }
  WeightedEnsemble out;
  out.beta = beta;
  out.length = length;
  out.energies.resize(count);
  out.weights = RealVector::Ones(count);
  for (int i = 0; i < count; ++i) {
    for (int s = 0; s < options.sweeps_between_samples; ++s) sweep();
    out.samples.push_back(state);
    out.energies(i) = energy(state, hamiltonian);
  }
  return out;
}

Estimate weighted_mean(const RealVector& values, const RealVector& weights) {
  require(values.size() == weights.size() && values.size() > 0, "weighted_mean: size mismatch or empty input");
  const Eigen::Index n = values.size();
  const double sw = weights.sum();
  const double swo = weights.dot(values);
  require(sw > 0.0, "weighted_mean: weights sum to zero");
  Estimate out{swo / sw, 0.0};
  if (n == 1) return out;
  RealVector loo(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rest = sw - weights(i);
    loo(i) = rest > 0.0 ? (swo - weights(i) * values(i)) / rest : out.value;
  }
  const double mean = loo.mean();
  out.standard_error = std::sqrt((n - 1.0) / n * (loo.array() - mean).square().sum());
  return out;
}

Estimate thermal_expectation(const WeightedEnsemble& ensemble,
                             const std::function<double(const MpsState&)>& observable) {
  RealVector values(static_cast<Eigen::Index>(ensemble.size()));
  for (std::size_t i = 0; i < ensemble.size(); ++i) values(static_cast<Eigen::Index>(i)) = observable(ensemble.samples[i]);
  return weighted_mean(values, ensemble.weights);
}

Estimate thermal_expectation(const WeightedEnsemble& ensemble, const Mpo& op) {
  return thermal_expectation(ensemble, [&](const MpsState& s) {
    const Complex v = mpo_expectation(s, op, s);
    if (std::abs(v.imag()) > 1e-9) throw NumericalError("thermal_expectation: operator is not Hermitian");
    return v.real();
  });
}

Histogram energy_histogram(const RealVector& energies, const RealVector& weights, int bins, EnergyAxis axis,
                           int length, std::optional<std::pair<double, double>> range) {
  require(bins >= 2, "energy_histogram: need at least two bins");
  require(energies.size() == weights.size() && energies.size() > 0, "energy_histogram: size mismatch or empty");
  const RealVector x = axis == EnergyAxis::per_site ? RealVector(energies / length) : energies;
  double lo = range ? range->first : x.minCoeff();
  double hi = range ? range->second : x.maxCoeff();
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.axis = axis;
  h.edges = RealVector::LinSpaced(bins + 1, lo, hi);
  h.density = RealVector::Zero(bins);
  const double width = (hi - lo) / bins;
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < lo || x(i) > hi) continue;
    const int b = std::min(bins - 1, static_cast<int>((x(i) - lo) / width));
    h.density(b) += weights(i);
    total += weights(i);
  }
  if (total > 0.0) h.density /= total * width;
  return h;
}

Histogram energy_histogram(const WeightedEnsemble& ensemble, int bins, EnergyAxis axis,
                           std::optional<std::pair<double, double>> range) {
  return energy_histogram(ensemble.energies, ensemble.weights, bins, axis, ensemble.length, range);
}

double weighted_ks_statistic(const RealVector& x, const RealVector& wx, const RealVector& y, const RealVector& wy) {
  require(x.size() == wx.size() && y.size() == wy.size(), "weighted_ks_statistic: size mismatch");
  require(x.size() > 0 && y.size() > 0, "weighted_ks_statistic: empty sample");
  struct Point {
    double value;
    double weight;
    int side;
  };
  std::vector<Point> points;
  const double sx = wx.sum();
  const double sy = wy.sum();
  for (Eigen::Index i = 0; i < x.size(); ++i) points.push_back({x(i), wx(i) / sx, 0});
  for (Eigen::Index i = 0; i < y.size(); ++i) points.push_back({y(i), wy(i) / sy, 1});
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.value < b.value; });
  double fx = 0.0;
  double fy = 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    (points[i].side == 0 ? fx : fy) += points[i].weight;
    if (i + 1 < points.size() && points[i + 1].value == points[i].value) continue;
    d = std::max(d, std::abs(fx - fy));
  }
  return d;
}

double ks_critical_value(double n, double m) {
  require(n > 0.0 && m > 0.0, "ks_critical_value: sample sizes must be positive");
  return 1.358 * std::sqrt((n + m) / (n * m));
}

FixedPointReport fixed_point_test(const Mpo& hamiltonian, const BathParams& bath, const WeightedEnsemble& ensemble,
                                  const std::vector<double>& times, const LangevinPlan& plan, std::uint64_t seed,
                                  int workers) {
  require(std::is_sorted(times.begin(), times.end()), "fixed_point_test: times must be ascending");
  require(!times.empty() && times.front() >= 0.0, "fixed_point_test: times must be non-negative");
  const double dt = plan.sweep.dt;
  std::vector<long> targets;
  for (double t : times) {
    const double steps = t / dt;
    require(std::abs(steps - std::round(steps)) < 1e-9, "fixed_point_test: times must be multiples of dt");
    targets.push_back(std::lround(steps));
  }
  const auto n = static_cast<Eigen::Index>(ensemble.size());
  FixedPointReport report;
  report.times = times;
  report.energies.assign(times.size(), RealVector::Zero(n));

  parallel_for(ensemble.size(), workers, [&](std::size_t i) {
    const NoiseStream noise(mix_seed(seed, i), ensemble.length, bath, dt);
    MpsState psi = ensemble.samples[i];
    long step = 0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      for (; step < targets[k]; ++step) psi = langevin_step(psi, hamiltonian, bath, noise.base_increment(step), plan);
      report.energies[k](static_cast<Eigen::Index>(i)) = energy(psi, hamiltonian);
    }
  });

  const double n_eff = ensemble.effective_sample_size();
  for (std::size_t k = 0; k < times.size(); ++k) {
    report.statistic.push_back(
        weighted_ks_statistic(ensemble.energies, ensemble.weights, report.energies[k], ensemble.weights));
    report.critical.push_back(ks_critical_value(n_eff, n_eff));
  }
  return report;
}

}  // namespace tdvpl
