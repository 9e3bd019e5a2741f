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

#ifndef TDVPL_LANGEVIN_HPP
#define TDVPL_LANGEVIN_HPP

#include <cstdint>
#include <vector>

#include "tdvpl/hamiltonian.hpp"
#include "tdvpl/mps.hpp"
#include "tdvpl/tdvp.hpp"

namespace tdvpl {

/// Markovian bath on every site and channel. Stores the friction gamma and
/// the noise strength gamma*T, so that the noise-only limit (gamma = 0,
/// gamma*T > 0) is representable.
struct BathParams {
  double gamma = 0.0;
  double noise = 0.0;  // gamma * T

  static BathParams from_temperature(double gamma, double temperature);
  static BathParams noise_only(double noise);

  /// T = noise / gamma; infinite in the noise-only limit, 0 for a closed system.
  double temperature() const;
  /// Variance of the accumulated kick over one step: 2 gamma T dt.
  double noise_variance_per_step(double dt) const { return 2.0 * noise * dt; }
  bool closed() const { return gamma == 0.0 && noise == 0.0; }
  void validate() const;
};

/// L x 3 independent N(0, 2 gamma T dt) draws, site-major.
SiteChannelMatrix sample_noise(Rng& rng, const BathParams& bath, double dt, int length);

/// Counter-based noise: the increment for base step k depends only on
/// (seed, k, site, channel). A coarse step spanning several base steps uses
/// the sum of their increments, so runs at different dt (or bond
/// dimension) see the same Brownian path.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, int length, const BathParams& bath, double base_dt);

  SiteChannelMatrix base_increment(std::int64_t base_step) const;
  /// Sum of `count` consecutive base increments starting at `first`.
  SiteChannelMatrix increment(std::int64_t first, int count) const;

  std::uint64_t seed() const { return seed_; }
  double base_dt() const { return base_dt_; }

 private:
  std::uint64_t seed_;
  int length_;
  BathParams bath_;
  double base_dt_;
};

/// Gauge data for the one-site tangent space at a state: left isometries,
/// right isometries, and the center tensor C_m of the mixed form at m.
struct TangentFrame {
  std::vector<SiteTensor> left;
  std::vector<SiteTensor> right;
  std::vector<SiteTensor> center;
  int length() const { return static_cast<int>(center.size()); }
};

TangentFrame tangent_frame(const MpsState& state);

/// Coefficients of P O|psi> in an orthonormal tangent basis, one block per
/// site. Blocks m < L-1 satisfy the left gauge condition; the last block is
/// orthogonal to the state itself, so the direction of |psi> is excluded.
struct TangentVector {
  std::vector<SiteTensor> blocks;
  Complex dot(const TangentVector& other) const;  // conjugate-linear in *this
  double squared_norm() const;
};

TangentVector tangent_projection_coefficients(const TangentFrame& frame, const Mpo& op);
TangentVector tangent_projection_coefficients(const MpsState& state, const Mpo& op);

/// The term of the tangent vector living on `site`, as an MPS.
MpsState tangent_block_state(const TangentFrame& frame, const TangentVector& t, int site);

/// -2 Im(t1^dag t2).
double poisson_bracket(const TangentVector& t1, const TangentVector& t2);
double poisson_bracket(const MpsState& state, const Mpo& op1, const Mpo& op2);

/// Same-site brackets of the three Pauli couplings and their brackets with H.
struct PoissonBlock {
  Eigen::Matrix3d bracket = Eigen::Matrix3d::Zero();  // {F_a, F_b}
  Eigen::Vector3d hamiltonian = Eigen::Vector3d::Zero();  // {F_a, H}
};
using PoissonBlocks = std::vector<PoissonBlock>;

/// How single-site brackets are evaluated. `local` uses the closed forms
/// valid for one-site couplings, {F_a, F_b} = -2 eps_abc <sigma_c> and
/// {F, H} = -2 Im <F H>, from one sweep. `tangent` projects every operator
/// explicitly and is kept for cross-checks.
enum class BracketEvaluation { local, tangent };

PoissonBlocks build_poisson_blocks(const MpsState& state, const Mpo& hamiltonian,
                                   BracketEvaluation how = BracketEvaluation::local);

/// Full 3L x 3L bracket matrix and 3L vector {F, H}, ordered 3*site + channel.
struct FullBrackets {
  RealMatrix bracket;
  RealVector hamiltonian;
};
inline constexpr int kMaxDenseBracketLength = 8;
FullBrackets build_full_brackets(const MpsState& state, const Mpo& hamiltonian);

/// Solutions of (I + gamma F) v = -({F, H} + F eta): the rates d<F>/dt
/// under H + sum (eta + gamma v) F.
struct FrictionVelocities {
  SiteChannelMatrix v;
  double max_condition = 1.0;
  /// Largest sqrt(1 + (gamma |F|)^2) seen, the exact condition for a real
  /// antisymmetric F.
  double max_condition_bound = 1.0;
};

inline constexpr double kMaxFrictionCondition = 1e8;

FrictionVelocities friction_velocities(const PoissonBlocks& blocks, const SiteChannelMatrix& eta,
                                       const BathParams& bath);
FrictionVelocities friction_velocities(const FullBrackets& brackets, const SiteChannelMatrix& eta,
                                       const BathParams& bath);

enum class NoiseScheme { stratonovich, explicit_euler };

struct LangevinPlan {
  SweepPlan sweep{};
  NoiseScheme scheme = NoiseScheme::stratonovich;
  bool dense_brackets = false;
};

struct LangevinStepInfo {
  LocalFieldCoefficients fields;
  FrictionVelocities velocities;
};

/// One step of the Langevin equation. `increment` holds the accumulated
/// noise over the step (variance 2 gamma T dt); the field applied during
/// the step is c = increment/dt + gamma v. With the midpoint scheme, v is
/// re-evaluated at a half-step predictor under the same noise.
MpsState langevin_step(const MpsState& state, const Mpo& hamiltonian, const BathParams& bath,
                       const SiteChannelMatrix& increment, const LangevinPlan& plan, LangevinStepInfo* info = nullptr);

}  // namespace tdvpl

#endif  // TDVPL_LANGEVIN_HPP
