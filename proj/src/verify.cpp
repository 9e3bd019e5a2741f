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

#include "tdvpl/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "tdvpl/ed_oracle.hpp"
#include "tdvpl/langevin.hpp"
#include "tdvpl/tdvp.hpp"

namespace tdvpl {

namespace {

Vector spin_up() {
  Vector v = Vector::Zero(kPhysDim);
  v(0) = 1.0;
  return v;
}

double mpo_vs_pauli_sum() {
  const IsingParams p;
  const Matrix a = ed::mpo_to_dense(build_tilted_ising(p, 6));
  const Matrix b = Matrix(ed::ising_hamiltonian(p, 6));
  return (a - b).cwiseAbs().maxCoeff();
}

double full_rank_infidelity() {
  const int length = 6;
  const IsingParams p;
  auto psi = embed_in_bond_dims(product_state(length, spin_up()), 8);
  auto ref = ed::dense_product_state(length, spin_up());
  const double dt = 0.01;
  for (int k = 0; k < 100; ++k) psi = tdvp_step(psi, build_tilted_ising(p, length), SweepPlan{dt});
  ref = ed::dense_evolve(ref, ed::ising_hamiltonian(p, length), nullptr, dt, 100);
  return std::abs(1.0 - std::abs(ref.amplitudes.dot(ed::dense_from_mps(psi).amplitudes)));
}

double observables_vs_dense(Rng& rng) {
  const int length = 8;
  const IsingParams p;
  const auto h = build_tilted_ising(p, length);
  const auto hd = ed::ising_hamiltonian(p, length);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto a = haar_random_mps(length, 8, rng);
    const auto b = haar_random_mps(length, 8, rng);
    const auto da = ed::dense_from_mps(a);
    const auto db = ed::dense_from_mps(b);
    worst = std::max(worst, std::abs(overlap(a, b) - da.amplitudes.dot(db.amplitudes)));
    worst = std::max(worst, std::abs(energy(a, h) - ed::expectation(da, hd)));
    for (int n = 0; n < length; ++n) {
      worst = std::max(worst, std::abs(expect_local(a, pauli::x(), n) -
                                       ed::expectation(da, ed::site_operator(length, n, pauli::x()))));
    }
  }
  return worst;
}

double bracket_vs_dense(Rng& rng) {
  const int length = 6;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto psi = haar_random_mps(length, 4, rng);
    const IsingParams p1{1.0, 0.3 * (k + 1), -0.7};
    const IsingParams p2{-0.4, 0.9, 0.2 * k};
    const auto o1 = build_tilted_ising(p1, length);
    const auto o2 = build_tilted_ising(p2, length);
    const double mps = poisson_bracket(psi, o1, o2);
    const double dense = ed::dense_tangent_bracket(psi, ed::mpo_to_dense(o1), ed::mpo_to_dense(o2));
    worst = std::max(worst, std::abs(mps - dense));
    worst = std::max(worst, std::abs(mps + poisson_bracket(psi, o2, o1)));
  }
  return worst;
}

double friction_block_vs_dense(Rng& rng) {
  const int length = 6;
  const auto h = build_tilted_ising(IsingParams{}, length);
  const BathParams bath = BathParams::from_temperature(0.3, 0.2);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const auto psi = haar_random_mps(length, 4, rng);
    const SiteChannelMatrix eta = sample_noise(rng, bath, 0.01, length) / 0.01;
    const auto block = friction_velocities(build_poisson_blocks(psi, h), eta, bath);
    const auto full = friction_velocities(build_full_brackets(psi, h), eta, bath);
    worst = std::max(worst, (block.v - full.v).cwiseAbs().maxCoeff());
  }
  return worst;
}

double noise_variance_error(std::uint64_t seed) {
  const BathParams bath = BathParams::noise_only(0.125);
  const double dt = 0.004;
  const NoiseStream stream(seed, 10, bath, dt);
  double sum = 0.0, sq = 0.0, count = 0.0;
  for (std::int64_t k = 0; k < 10000; ++k) {
    const auto x = stream.base_increment(k);
    sum += x.sum();
    sq += x.squaredNorm();
    count += static_cast<double>(x.size());
  }
  const double mean = sum / count;
  const double var = sq / count - mean * mean;
  return std::abs(var / bath.noise_variance_per_step(dt) - 1.0);
}

}  // namespace

std::vector<CheckResult> run_oracle_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckResult> out;
  auto run = [&](const std::string& name, double bound, const std::function<double()>& f) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = name;
    r.bound = bound;
    r.value = f();
    r.passed = r.value <= bound;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(r);
  };
  run("mpo_vs_pauli_sum", 1e-12, mpo_vs_pauli_sum);
  run("full_rank_tdvp_infidelity", 1e-6, full_rank_infidelity);
  run("observables_vs_dense", 1e-9, [&] { return observables_vs_dense(rng); });
  run("poisson_bracket_vs_dense", 1e-8, [&] { return bracket_vs_dense(rng); });
  run("friction_block_vs_dense", 1e-12, [&] { return friction_block_vs_dense(rng); });
  // 3e5 draws: the relative standard error of the variance is about 0.26%.
  run("noise_variance_relative_error", 0.01, [&] { return noise_variance_error(seed); });
  return out;
}

}  // namespace tdvpl
