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

#ifndef TDVPL_HAMILTONIAN_HPP
#define TDVPL_HAMILTONIAN_HPP

#include <optional>
#include <utility>
#include <vector>

#include "tdvpl/mps.hpp"
#include "tdvpl/types.hpp"

namespace tdvpl {

/// H = -sum_i [J Z_i Z_{i+1} + h Z_i + g X_i] on an open chain.
struct IsingParams {
  double J = 1.0;
  double h = 0.5;
  double g = -1.05;
};

/// One MPO tensor: a left_dim x right_dim grid of 2x2 operators.
struct MpoSite {
  int left_dim = 0;
  int right_dim = 0;
  std::vector<Matrix2> blocks;             // row-major over (left, right)
  std::vector<std::pair<int, int>> nonzero;  // blocks that are not identically zero

  MpoSite() = default;
  MpoSite(int left, int right);
  Matrix2& at(int b, int bp) { return blocks[static_cast<std::size_t>(b * right_dim + bp)]; }
  const Matrix2& at(int b, int bp) const { return blocks[static_cast<std::size_t>(b * right_dim + bp)]; }
  void refresh_sparsity();
};

/// Matrix product operator with explicit boundary selectors.
struct Mpo {
  std::vector<MpoSite> sites;
  int left_boundary = 0;   // MPO bond index selected on the left edge
  int right_boundary = 0;  // MPO bond index selected on the right edge
  /// Block holding one-site terms, when the operator has one.
  std::optional<std::pair<int, int>> local_slot;

  int length() const { return static_cast<int>(sites.size()); }
  int bond_dim() const;
};

Mpo build_tilted_ising(const IsingParams& params, int length);

/// op on `site`, identity elsewhere (MPO bond dimension 1).
Mpo local_operator_mpo(int length, int site, const Matrix2& op);
/// Product of one-site factors (earlier factors act first on a shared site).
Mpo product_operator_mpo(int length, const std::vector<std::pair<int, Matrix2>>& factors);

/// c(n, a): coefficient of Pauli a in {x, y, z} on site n.
using LocalFieldCoefficients = SiteChannelMatrix;

/// H + sum_{n,a} c(n,a) sigma^a_n, folded into the one-site slot.
Mpo with_local_fields(const Mpo& hamiltonian, const LocalFieldCoefficients& fields);

/// Left/right environments: one matrix per MPO bond index. Left environments
/// are bra x ket, right environments are ket x bra.
using Environment = std::vector<Matrix>;

Environment left_boundary_environment(const Mpo& mpo);
Environment right_boundary_environment(const Mpo& mpo);
Environment extend_left(const Environment& env, const SiteTensor& bra, const SiteTensor& ket, const MpoSite& w);
Environment extend_right(const Environment& env, const SiteTensor& bra, const SiteTensor& ket, const MpoSite& w);

/// H_eff x for the one-site effective Hamiltonian.
SiteTensor apply_site_hamiltonian(const Environment& left, const MpoSite& w, const Environment& right,
                                  const SiteTensor& x);
/// K_eff c for the zero-site (bond) effective Hamiltonian.
Matrix apply_bond_hamiltonian(const Environment& left, const Environment& right, const Matrix& c);

/// Dense one-site effective Hamiltonian in the SiteTensor::flatten() basis.
Matrix dense_site_hamiltonian(const Environment& left, const MpoSite& w, const Environment& right,
                              Eigen::Index left_dim, Eigen::Index right_dim);

/// <bra|O|ket>.
Complex mpo_expectation(const MpsState& bra, const Mpo& op, const MpsState& ket);

/// <psi|H|psi> for a normalized state.
double energy(const MpsState& state, const Mpo& hamiltonian);

/// Requires `state` canonical at `site`.
Matrix effective_site_hamiltonian(const Mpo& hamiltonian, const MpsState& state, int site);

}  // namespace tdvpl

#endif  // TDVPL_HAMILTONIAN_HPP
