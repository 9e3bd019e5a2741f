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

#ifndef TDVPL_ED_ORACLE_HPP
#define TDVPL_ED_ORACLE_HPP

#include <functional>

#include <Eigen/Sparse>

#include "tdvpl/hamiltonian.hpp"
#include "tdvpl/mps.hpp"

// Full Hilbert space reference implementation. Deliberately naive and
// independent of the canonical-form machinery used by the MPS code.
// Basis index: sum_n sigma_n 2^(L-1-n), site 0 most significant.

namespace tdvpl::ed {

inline constexpr int kMaxStateLength = 12;
inline constexpr int kMaxTangentLength = 8;

using SparseMatrix = Eigen::SparseMatrix<Complex>;

struct DenseState {
  int length = 0;
  Vector amplitudes;
};

DenseState dense_from_mps(const MpsState& state);
/// Same amplitudes, contracted from the right edge inwards.
Vector dense_from_mps_right_to_left(const MpsState& state);

DenseState dense_product_state(int length, const Vector& local_state);

SparseMatrix site_operator(int length, int site, const Matrix2& op);
SparseMatrix two_site_operator(int length, int site_a, const Matrix2& op_a, int site_b, const Matrix2& op_b);

/// Brute-force Pauli-string sum of the tilted-field Ising chain.
SparseMatrix ising_hamiltonian(const IsingParams& params, int length);
SparseMatrix local_fields_operator(const LocalFieldCoefficients& fields);

/// Sums every MPO bond path; for small L only.
Matrix mpo_to_dense(const Mpo& mpo);

using FieldSchedule = std::function<LocalFieldCoefficients(int step)>;

/// Applies exp(-i dt (H + sum c sigma)) once per step, with the field
/// schedule evaluated at each step index. A null schedule means no fields.
DenseState dense_evolve(DenseState state, const SparseMatrix& hamiltonian, const FieldSchedule& fields, double dt,
                        int steps);

double expectation(const DenseState& state, const SparseMatrix& op);

/// Orthonormal basis of the MPS tangent space at `state`, built from the
/// holomorphic derivatives with respect to every tensor entry.
struct TangentBasis {
  Matrix basis;             // 2^L x rank, orthonormal columns
  Eigen::Index raw_count = 0;  // number of derivative vectors
  Eigen::Index rank = 0;
  Eigen::Index rank_deficiency() const { return raw_count - rank; }
};

TangentBasis dense_tangent_basis(const MpsState& state, double cutoff = 1e-10);

/// {O1, O2} = -2 Im <psi|O1 P O2|psi>, P the tangent projector with the
/// direction of |psi> removed.
double dense_tangent_bracket(const MpsState& state, const Matrix& op1, const Matrix& op2);
double dense_tangent_bracket(const TangentBasis& tangent, const Vector& psi, const Matrix& op1, const Matrix& op2);

/// P O|psi> as a dense vector.
Vector dense_tangent_projection(const TangentBasis& tangent, const Vector& psi, const Matrix& op);

}  // namespace tdvpl::ed

#endif  // TDVPL_ED_ORACLE_HPP
