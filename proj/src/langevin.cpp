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

#include "tdvpl/langevin.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "tdvpl/errors.hpp"
#include "tdvpl/hashing.hpp"
#include "tdvpl/linalg.hpp"

namespace tdvpl {

namespace {

constexpr double kGaugeTolerance = 1e-10;
constexpr double kAntisymmetryTolerance = 1e-10;

}  // namespace

BathParams BathParams::from_temperature(double gamma, double temperature) {
  BathParams bath{gamma, gamma * temperature};
  require(temperature >= 0.0, "BathParams: temperature must be non-negative");
  bath.validate();
  return bath;
}

BathParams BathParams::noise_only(double noise) {
  BathParams bath{0.0, noise};
  bath.validate();
  return bath;
}

double BathParams::temperature() const {
  if (gamma > 0.0) return noise / gamma;
  return noise > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

void BathParams::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ContractViolation("BathParams: gamma must be finite and >= 0");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ContractViolation("BathParams: gamma*T must be finite and >= 0");
}

SiteChannelMatrix sample_noise(Rng& rng, const BathParams& bath, double dt, int length) {
  require(dt > 0.0, "sample_noise: dt must be positive");
  SiteChannelMatrix out = SiteChannelMatrix::Zero(length, kChannels);
  const double variance = bath.noise_variance_per_step(dt);
  if (variance == 0.0) return out;
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (int n = 0; n < length; ++n) {
    for (int a = 0; a < kChannels; ++a) out(n, a) = normal(rng);
  }
  return out;
}

NoiseStream::NoiseStream(std::uint64_t seed, int length, const BathParams& bath, double base_dt)
    : seed_(seed), length_(length), bath_(bath), base_dt_(base_dt) {
  require(base_dt > 0.0, "NoiseStream: base dt must be positive");
  bath_.validate();
}

SiteChannelMatrix NoiseStream::base_increment(std::int64_t base_step) const {
  Rng rng(mix_seed(seed_, static_cast<std::uint64_t>(base_step)));
  return sample_noise(rng, bath_, base_dt_, length_);
}

SiteChannelMatrix NoiseStream::increment(std::int64_t first, int count) const {
  require(count >= 1, "NoiseStream::increment: need at least one base step");
  SiteChannelMatrix sum = base_increment(first);
  for (int k = 1; k < count; ++k) sum += base_increment(first + k);
  return sum;
}

TangentFrame tangent_frame(const MpsState& state) {
  const int length = state.length();
  const MpsState s = state.center() == length - 1 ? state : canonicalize(state, length - 1);
  TangentFrame frame;
  frame.left = s.sites();
  frame.right.resize(length);
  frame.center.resize(length);
  for (int m = 0; m + 1 < length; ++m) {
    if (left_isometry_residual(frame.left[m]) > kGaugeTolerance) {
      throw ContractViolation("tangent_frame: left gauge condition violated at site " + std::to_string(m));
    }
  }
  SiteTensor c = s.site(length - 1);
  for (int m = length - 1; m >= 1; --m) {
    frame.center[m] = c;
    const auto qr = qr_decompose(c.right_grouped().adjoint());
    frame.right[m] = SiteTensor::from_right_grouped(qr.q.adjoint(), c.right());
    if (right_isometry_residual(frame.right[m]) > kGaugeTolerance) {
      throw ContractViolation("tangent_frame: right gauge condition violated at site " + std::to_string(m));
    }
    c = frame.left[m - 1];
    const Matrix r = qr.r.adjoint();
    for (auto& block : c.s) block = block * r;
  }
  frame.center[0] = c;
  frame.right[0] = c;
  return frame;
}

Complex TangentVector::dot(const TangentVector& other) const {
  require(blocks.size() == other.blocks.size(), "TangentVector::dot: length mismatch");
  // Spelled out in real arithmetic (built without FMA contraction) so that
  // Im(t1^dag t2) = -Im(t2^dag t1) holds bit for bit.
  double re = 0.0;
  double im = 0.0;
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    for (int sigma = 0; sigma < kPhysDim; ++sigma) {
      const Matrix& a = blocks[m].s[sigma];
      const Matrix& b = other.blocks[m].s[sigma];
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const Complex x = a.data()[i];
        const Complex y = b.data()[i];
        re += x.real() * y.real() + x.imag() * y.imag();
        im += x.real() * y.imag() - x.imag() * y.real();
      }
    }
  }
  return {re, im};
}

double TangentVector::squared_norm() const { return dot(*this).real(); }

namespace {

// Y_m = <left isometries, sigma, right isometries | O | psi> for every site.
std::vector<SiteTensor> effective_projections(const TangentFrame& frame, const Mpo& op) {
  const int length = frame.length();
  require(op.length() == length, "tangent projection: operator length differs from state length");
  std::vector<Environment> left(length);
  left[0] = left_boundary_environment(op);
  for (int m = 0; m + 1 < length; ++m) left[m + 1] = extend_left(left[m], frame.left[m], frame.left[m], op.sites[m]);
  std::vector<SiteTensor> y(length);
  Environment right = right_boundary_environment(op);
  for (int m = length - 1; m >= 0; --m) {
    y[m] = apply_site_hamiltonian(left[m], op.sites[m], right, frame.center[m]);
    if (m > 0) right = extend_right(right, frame.right[m], frame.right[m], op.sites[m]);
  }
  return y;
}

Complex flat_dot(const SiteTensor& a, const SiteTensor& b) { return a.flatten().dot(b.flatten()); }

SiteTensor apply_pauli(const SiteTensor& x, const Matrix2& op) {
  SiteTensor out(x.left(), x.right());
  for (int t = 0; t < kPhysDim; ++t) {
    out.s[t] = op(t, 0) * x.s[0] + op(t, 1) * x.s[1];
  }
  return out;
}

void check_antisymmetric(const Eigen::Ref<const RealMatrix>& f, const char* where) {
  const double residual = (f + f.transpose()).cwiseAbs().maxCoeff();
  if (residual > kAntisymmetryTolerance) {
    std::ostringstream msg;
    msg << where << ": bracket matrix not antisymmetric (residual " << residual << ")";
    throw NumericalError(msg.str());
  }
}

}  // namespace

TangentVector tangent_projection_coefficients(const TangentFrame& frame, const Mpo& op) {
  const int length = frame.length();
  auto y = effective_projections(frame, op);
  TangentVector t;
  t.blocks.resize(length);
  for (int m = 0; m < length; ++m) {
    if (m + 1 < length) {
      const Matrix a = frame.left[m].left_grouped();
      const Matrix yg = y[m].left_grouped();
      t.blocks[m] = SiteTensor::from_left_grouped(yg - a * (a.adjoint() * yg), y[m].left());
    } else {
      const SiteTensor& c = frame.center[m];
      const Complex along = flat_dot(c, y[m]);
      SiteTensor b = y[m];
      for (int sigma = 0; sigma < kPhysDim; ++sigma) b.s[sigma] -= along * c.s[sigma];
      t.blocks[m] = std::move(b);
    }
  }
  return t;
}

TangentVector tangent_projection_coefficients(const MpsState& state, const Mpo& op) {
  return tangent_projection_coefficients(tangent_frame(state), op);
}

MpsState tangent_block_state(const TangentFrame& frame, const TangentVector& t, int site) {
  const int length = frame.length();
  require(site >= 0 && site < length, "tangent_block_state: site out of range");
  std::vector<SiteTensor> sites;
  sites.reserve(length);
  for (int m = 0; m < length; ++m) {
    sites.push_back(m < site ? frame.left[m] : m == site ? t.blocks[m] : frame.right[m]);
  }
  return MpsState(std::move(sites), std::nullopt);
}

double poisson_bracket(const TangentVector& t1, const TangentVector& t2) { return -2.0 * t1.dot(t2).imag(); }

double poisson_bracket(const MpsState& state, const Mpo& op1, const Mpo& op2) {
  const auto frame = tangent_frame(state);
  return poisson_bracket(tangent_projection_coefficients(frame, op1), tangent_projection_coefficients(frame, op2));
}

PoissonBlocks build_poisson_blocks(const MpsState& state, const Mpo& hamiltonian, BracketEvaluation how) {
  const int length = state.length();
  const auto frame = tangent_frame(state);
  PoissonBlocks blocks(length);
  if (how == BracketEvaluation::tangent) {
    const auto t_h = tangent_projection_coefficients(frame, hamiltonian);
    for (int n = 0; n < length; ++n) {
      std::array<TangentVector, kChannels> t;
      for (int a = 0; a < kChannels; ++a) {
        t[a] = tangent_projection_coefficients(frame, local_operator_mpo(length, n, pauli::channel(a)));
      }
      for (int a = 0; a < kChannels; ++a) {
        blocks[n].hamiltonian(a) = poisson_bracket(t[a], t_h);
        for (int b = 0; b < kChannels; ++b) blocks[n].bracket(a, b) = poisson_bracket(t[a], t[b]);
      }
      check_antisymmetric(blocks[n].bracket, "build_poisson_blocks");
    }
    return blocks;
  }
  const auto y = effective_projections(frame, hamiltonian);
  for (int n = 0; n < length; ++n) {
    const SiteTensor& c = frame.center[n];
    Eigen::Vector3d spin;
    for (int a = 0; a < kChannels; ++a) {
      const SiteTensor fc = apply_pauli(c, pauli::channel(a));
      spin(a) = flat_dot(c, fc).real();
      blocks[n].hamiltonian(a) = -2.0 * flat_dot(fc, y[n]).imag();
    }
    // {F_a, F_b} = -2 Im <sigma_a sigma_b> = -2 eps_abc <sigma_c>.
    Eigen::Matrix3d& f = blocks[n].bracket;
    f << 0.0, -2.0 * spin(2), 2.0 * spin(1),
        2.0 * spin(2), 0.0, -2.0 * spin(0),
        -2.0 * spin(1), 2.0 * spin(0), 0.0;
  }
  return blocks;
}

FullBrackets build_full_brackets(const MpsState& state, const Mpo& hamiltonian) {
  const int length = state.length();
  if (length > kMaxDenseBracketLength) {
    throw ContractViolation("build_full_brackets: L = " + std::to_string(length) + " exceeds the dense bracket limit " +
                            std::to_string(kMaxDenseBracketLength));
  }
  const auto frame = tangent_frame(state);
  const auto t_h = tangent_projection_coefficients(frame, hamiltonian);
  std::vector<TangentVector> t;
  for (int n = 0; n < length; ++n) {
    for (int a = 0; a < kChannels; ++a) {
      t.push_back(tangent_projection_coefficients(frame, local_operator_mpo(length, n, pauli::channel(a))));
    }
  }
  const auto count = static_cast<Eigen::Index>(t.size());
  FullBrackets out{RealMatrix::Zero(count, count), RealVector::Zero(count)};
  for (Eigen::Index i = 0; i < count; ++i) {
    out.hamiltonian(i) = poisson_bracket(t[i], t_h);
    for (Eigen::Index j = 0; j < count; ++j) out.bracket(i, j) = poisson_bracket(t[i], t[j]);
  }
  check_antisymmetric(out.bracket, "build_full_brackets");
  return out;
}

namespace {

template <typename MatrixType>
void record_conditioning(const MatrixType& f, double gamma, const MatrixType& system, FrictionVelocities& out,
                         const std::string& where) {
  Eigen::JacobiSVD<MatrixType> sys(system);
  const auto& s = sys.singularValues();
  const double cond = s(0) / s(s.size() - 1);
  Eigen::JacobiSVD<MatrixType> fsvd(f);
  const double fnorm = fsvd.singularValues()(0);
  if (!std::isfinite(cond) || cond > kMaxFrictionCondition) {
    std::ostringstream msg;
    msg << "friction_velocities: (I + gamma F) ill-conditioned at " << where << " (condition " << cond << ")";
    throw NumericalError(msg.str());
  }
  out.max_condition = std::max(out.max_condition, cond);
  out.max_condition_bound = std::max(out.max_condition_bound, std::sqrt(1.0 + gamma * gamma * fnorm * fnorm));
}

}  // namespace

FrictionVelocities friction_velocities(const PoissonBlocks& blocks, const SiteChannelMatrix& eta,
                                       const BathParams& bath) {
  const auto length = static_cast<Eigen::Index>(blocks.size());
  require(eta.rows() == length, "friction_velocities: noise has the wrong number of sites");
  FrictionVelocities out;
  out.v.resize(length, kChannels);
  for (Eigen::Index n = 0; n < length; ++n) {
    const Eigen::Matrix3d& f = blocks[n].bracket;
    const Eigen::Vector3d e = eta.row(n).transpose();
    const Eigen::Matrix3d system = Eigen::Matrix3d::Identity() + bath.gamma * f;
    record_conditioning<Eigen::Matrix3d>(f, bath.gamma, system, out, "site " + std::to_string(n));
    const Eigen::Vector3d rhs = -(blocks[n].hamiltonian + f * e);
    out.v.row(n) = system.partialPivLu().solve(rhs).transpose();
  }
  return out;
}

FrictionVelocities friction_velocities(const FullBrackets& brackets, const SiteChannelMatrix& eta,
                                       const BathParams& bath) {
  const Eigen::Index count = brackets.hamiltonian.size();
  require(eta.size() == count, "friction_velocities: noise size differs from bracket size");
  RealVector e(count);
  for (Eigen::Index n = 0; n < eta.rows(); ++n) e.segment<3>(kChannels * n) = eta.row(n).transpose();
  const RealMatrix system = RealMatrix::Identity(count, count) + bath.gamma * brackets.bracket;
  FrictionVelocities out;
  record_conditioning<RealMatrix>(brackets.bracket, bath.gamma, system, out, "dense system");
  const RealVector v = system.partialPivLu().solve(-(brackets.hamiltonian + brackets.bracket * e));
  out.v.resize(eta.rows(), kChannels);
  for (Eigen::Index n = 0; n < eta.rows(); ++n) out.v.row(n) = v.segment<3>(kChannels * n).transpose();
  return out;
}

namespace {

FrictionVelocities velocities_at(const MpsState& state, const Mpo& hamiltonian, const SiteChannelMatrix& eta,
                                 const BathParams& bath, const LangevinPlan& plan) {
  if (plan.dense_brackets) return friction_velocities(build_full_brackets(state, hamiltonian), eta, bath);
  return friction_velocities(build_poisson_blocks(state, hamiltonian), eta, bath);
}

}  // namespace

MpsState langevin_step(const MpsState& state, const Mpo& hamiltonian, const BathParams& bath,
                       const SiteChannelMatrix& increment, const LangevinPlan& plan, LangevinStepInfo* info) {
  bath.validate();
  const int length = state.length();
  require(increment.rows() == length, "langevin_step: noise increment has the wrong number of sites");
  const double dt = plan.sweep.dt;
  const SiteChannelMatrix eta = increment / dt;

  if (bath.gamma == 0.0) {
    if (info) {
      info->fields = eta;
      info->velocities = FrictionVelocities{SiteChannelMatrix::Zero(length, kChannels)};
    }
    if (eta.isZero(0.0)) return tdvp_step(state, hamiltonian, plan.sweep);
    return tdvp_step_timedependent(state, hamiltonian, eta, plan.sweep);
  }

  FrictionVelocities v = velocities_at(state, hamiltonian, eta, bath, plan);
  SiteChannelMatrix fields = eta + bath.gamma * v.v;
  if (plan.scheme == NoiseScheme::stratonovich) {
    SweepPlan half = plan.sweep;
    half.dt = 0.5 * dt;
    const MpsState mid = tdvp_step_timedependent(state, hamiltonian, fields, half);
    FrictionVelocities vm = velocities_at(mid, hamiltonian, eta, bath, plan);
    vm.max_condition = std::max(vm.max_condition, v.max_condition);
    vm.max_condition_bound = std::max(vm.max_condition_bound, v.max_condition_bound);
    v = std::move(vm);
    fields = eta + bath.gamma * v.v;
  }
  if (info) {
    info->fields = fields;
    info->velocities = v;
  }
  return tdvp_step_timedependent(state, hamiltonian, fields, plan.sweep);
}

}  // namespace tdvpl
