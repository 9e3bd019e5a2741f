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

#ifndef TDVPL_MPS_HPP
#define TDVPL_MPS_HPP

#include <array>
#include <optional>
#include <random>
#include <vector>

#include "tdvpl/types.hpp"

namespace tdvpl {

using Rng = std::mt19937_64;

/// One MPS tensor A^sigma_{alpha beta}, stored as d matrices of shape left x right.
struct SiteTensor {
  std::array<Matrix, kPhysDim> s;

  SiteTensor() = default;
  SiteTensor(Eigen::Index left, Eigen::Index right);

  Eigen::Index left() const { return s[0].rows(); }
  Eigen::Index right() const { return s[0].cols(); }
  Eigen::Index size() const { return kPhysDim * left() * right(); }

  /// (d*left) x right, row index sigma*left + alpha.
  Matrix left_grouped() const;
  /// left x (d*right), column index sigma*right + beta.
  Matrix right_grouped() const;
  static SiteTensor from_left_grouped(const Matrix& m, Eigen::Index left);
  static SiteTensor from_right_grouped(const Matrix& m, Eigen::Index right);

  /// Flat vector, index sigma*left*right + beta*left + alpha.
  Vector flatten() const;
  static SiteTensor unflatten(const Vector& v, Eigen::Index left, Eigen::Index right);

  double norm() const;
};

/// Finite open-chain matrix product state with physical dimension 2.
///
/// When `center()` holds c, tensors left of c are left isometries and tensors
/// right of c are right isometries. Code that mutates tensors through
/// `sites()` is responsible for keeping that tag honest.
class MpsState {
 public:
  MpsState() = default;
  MpsState(std::vector<SiteTensor> sites, std::optional<int> center);

  int length() const { return static_cast<int>(sites_.size()); }
  const std::vector<SiteTensor>& sites() const { return sites_; }
  std::vector<SiteTensor>& sites() { return sites_; }
  const SiteTensor& site(int n) const { return sites_.at(n); }
  SiteTensor& site(int n) { return sites_.at(n); }

  std::optional<int> center() const { return center_; }
  void set_center(std::optional<int> c) { center_ = c; }

  /// L+1 entries; bond n sits between sites n-1 and n, bonds 0 and L are 1.
  std::vector<Eigen::Index> bond_dims() const;
  Eigen::Index max_bond_dim() const;

 private:
  std::vector<SiteTensor> sites_;
  std::optional<int> center_;
};

/// D_n = min(d^n, d_max, d^(L-n)) for n = 0..L.
std::vector<Eigen::Index> bond_schedule(int length, Eigen::Index d_max);

/// Central bond used for entropy time series.
inline int center_bond(int length) { return length / 2; }

MpsState product_state(int length, const Vector& local_state);

/// Zero-pads every tensor to the bond schedule for `d_max` and brings the
/// result to left-canonical form. The physical state is unchanged.
MpsState embed_in_bond_dims(const MpsState& state, Eigen::Index d_max);

/// Left isometries on [0, center), right isometries on (center, L).
void make_canonical(MpsState& state, int center);
MpsState canonicalize(MpsState state, int center);

/// max |sum_s A_s^dag A_s - I|.
double left_isometry_residual(const SiteTensor& a);
/// max |sum_s A_s A_s^dag - I|.
double right_isometry_residual(const SiteTensor& a);

Complex overlap(const MpsState& bra, const MpsState& ket);
double norm_squared(const MpsState& state);

/// <psi|op_site|psi> for a 2x2 Hermitian operator on a normalized state.
double expect_local(const MpsState& state, const Matrix2& op, int site);

/// Applies a 2x2 operator to the physical leg of one site.
void apply_local(MpsState& state, const Matrix2& op, int site);

struct SchmidtSpectrum {
  int bond = 0;
  RealVector values;  // descending, sum of squares = 1
};

SchmidtSpectrum schmidt_spectrum(const MpsState& state, int bond);
/// Spectra of bonds 1..L-1 from a single sweep (entry i is bond i+1).
std::vector<SchmidtSpectrum> all_schmidt_spectra(const MpsState& state);

/// Schmidt values below this are dropped from the entropy sum.
inline constexpr double kSchmidtCutoff = 1e-14;

/// S = -sum lambda^2 ln lambda^2, in nats.
double von_neumann_entropy(const SchmidtSpectrum& spectrum);
double von_neumann_entropy(const RealVector& schmidt_values);

/// Left-canonical MPS whose tensors are independent Haar isometries, drawn as
/// the Q factor of complex Gaussian matrices.
MpsState haar_random_mps(int length, Eigen::Index d_max, Rng& rng);

/// Haar isometry of shape rows x cols (rows >= cols).
Matrix haar_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace tdvpl

#endif  // TDVPL_MPS_HPP
