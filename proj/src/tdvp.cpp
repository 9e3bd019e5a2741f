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

#include "tdvpl/tdvp.hpp"

#include <cmath>
#include <sstream>

#include "tdvpl/errors.hpp"
#include "tdvpl/linalg.hpp"

namespace tdvpl {

Mpo zero_hamiltonian(int length) {
  require(length >= 1, "zero_hamiltonian: need L >= 1");
  Mpo mpo;
  mpo.left_boundary = 1;
  mpo.right_boundary = 0;
  mpo.local_slot = std::make_pair(1, 0);
  for (int n = 0; n < length; ++n) {
    MpoSite w(2, 2);
    w.at(0, 0) = pauli::identity();
    w.at(1, 1) = pauli::identity();
    w.refresh_sparsity();
    mpo.sites.push_back(std::move(w));
  }
  return mpo;
}

namespace {

SiteTensor evolve_site(const Environment& left, const MpoSite& w, const Environment& right, const SiteTensor& x,
                       double tau, const SweepPlan& plan) {
  const Eigen::Index n = x.size();
  if (n <= plan.dense_limit) {
    const Matrix h = dense_site_hamiltonian(left, w, right, x.left(), x.right());
    if (hermiticity_residual(h) > 1e-10) {
      throw NumericalError("tdvp: effective site Hamiltonian is not Hermitian");
    }
    return SiteTensor::unflatten(expm_i_hermitian(h, tau) * x.flatten(), x.left(), x.right());
  }
  const Eigen::Index l = x.left();
  const Eigen::Index r = x.right();
  auto apply = [&](const Vector& v) {
    return apply_site_hamiltonian(left, w, right, SiteTensor::unflatten(v, l, r)).flatten();
  };
  return SiteTensor::unflatten(expm_krylov(apply, x.flatten(), tau, plan.krylov), l, r);
}

Matrix evolve_bond(const Environment& left, const Environment& right, const Matrix& c, double tau,
                   const SweepPlan& plan) {
  const Eigen::Index rows = c.rows();
  const Eigen::Index cols = c.cols();
  auto apply = [&](const Vector& v) {
    const Matrix out = apply_bond_hamiltonian(left, right, Eigen::Map<const Matrix>(v.data(), rows, cols));
    return Vector(Eigen::Map<const Vector>(out.data(), out.size()));
  };
  const Vector flat = Eigen::Map<const Vector>(c.data(), c.size());
  Vector evolved;
  if (c.size() <= plan.dense_limit) {
    Matrix k(c.size(), c.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      Vector e = Vector::Zero(c.size());
      e(j) = 1.0;
      k.col(j) = apply(e);
    }
    if (hermiticity_residual(k) > 1e-10) throw NumericalError("tdvp: effective bond Hamiltonian is not Hermitian");
    evolved = expm_i_hermitian(k, tau) * flat;
  } else {
    evolved = expm_krylov(apply, flat, tau, plan.krylov);
  }
  return Eigen::Map<const Matrix>(evolved.data(), rows, cols);
}

}  // namespace

MpsState tdvp_step(MpsState state, const Mpo& hamiltonian, const SweepPlan& plan) {
  const int length = state.length();
  require(plan.dt > 0.0, "tdvp_step: time step must be positive");
  require(hamiltonian.length() == length, "tdvp_step: Hamiltonian length differs from state length");
  if (state.center() != length - 1) make_canonical(state, length - 1);
  {
    const double norm2 = state.site(length - 1).norm();
    if (std::abs(norm2 * norm2 - 1.0) > 1e-8) throw ContractViolation("tdvp_step: input state is not normalized");
  }
  const double tau = 0.5 * plan.dt;
  auto& sites = state.sites();
  const auto& w = hamiltonian.sites;

  std::vector<Environment> left(length);
  std::vector<Environment> right(length);
  left[0] = left_boundary_environment(hamiltonian);
  for (int n = 0; n + 1 < length; ++n) left[n + 1] = extend_left(left[n], sites[n], sites[n], w[n]);
  right[length - 1] = right_boundary_environment(hamiltonian);

  // Right to left.
  for (int n = length - 1; n >= 0; --n) {
    sites[n] = evolve_site(left[n], w[n], right[n], sites[n], tau, plan);
    if (n == 0) break;
    const Eigen::Index r = sites[n].right();
    auto qr = qr_decompose(sites[n].right_grouped().adjoint());
    sites[n] = SiteTensor::from_right_grouped(qr.q.adjoint(), r);
    right[n - 1] = extend_right(right[n], sites[n], sites[n], w[n]);
    const Matrix c = evolve_bond(left[n], right[n - 1], qr.r.adjoint(), -tau, plan);
    for (auto& m : sites[n - 1].s) m = m * c;
  }
  state.set_center(0);

  // Left to right.
  for (int n = 0; n < length; ++n) {
    sites[n] = evolve_site(left[n], w[n], right[n], sites[n], tau, plan);
    if (n == length - 1) break;
    const Eigen::Index l = sites[n].left();
    auto qr = qr_decompose(sites[n].left_grouped());
    sites[n] = SiteTensor::from_left_grouped(qr.q, l);
    left[n + 1] = extend_left(left[n], sites[n], sites[n], w[n]);
    const Matrix c = evolve_bond(left[n + 1], right[n], qr.r, -tau, plan);
    for (auto& m : sites[n + 1].s) m = c * m;
  }
  state.set_center(length - 1);

  const double norm = sites[length - 1].norm();
  if (!std::isfinite(norm) || std::abs(norm * norm - 1.0) > kNormDriftLimit) {
    std::ostringstream msg;
    msg << "tdvp_step: norm drifted to " << norm * norm;
    throw IntegrationFailure(msg.str());
  }
  return state;
}

MpsState tdvp_step_timedependent(MpsState state, const Mpo& base, const LocalFieldCoefficients& fields,
                                 const SweepPlan& plan) {
  return tdvp_step(std::move(state), with_local_fields(base, fields), plan);
}

}  // namespace tdvpl
