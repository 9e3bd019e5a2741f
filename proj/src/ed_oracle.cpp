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

#include "tdvpl/ed_oracle.hpp"

#include <cmath>
#include <sstream>

#include "tdvpl/errors.hpp"
#include "tdvpl/krylov.hpp"
#include "tdvpl/linalg.hpp"

namespace tdvpl::ed {

namespace {

void check_length(int length, int limit, const char* what) {
  if (length > limit) {
    std::ostringstream msg;
    msg << what << ": L = " << length << " exceeds the dense oracle limit " << limit;
    throw ContractViolation(msg.str());
  }
}

Eigen::Index dim_of(int length) { return Eigen::Index{1} << length; }

}  // namespace

DenseState dense_from_mps(const MpsState& state) {
  const int length = state.length();
  check_length(length, kMaxStateLength, "dense_from_mps");
  Matrix prefix = Matrix::Ones(1, 1);  // rows: basis of sites < n, cols: bond
  for (int n = 0; n < length; ++n) {
    const auto& t = state.site(n);
    Matrix next(prefix.rows() * kPhysDim, t.right());
    for (Eigen::Index i = 0; i < prefix.rows(); ++i) {
      for (int sigma = 0; sigma < kPhysDim; ++sigma) {
        next.row(i * kPhysDim + sigma) = prefix.row(i) * t.s[sigma];
      }
    }
    prefix = std::move(next);
  }
  return DenseState{length, prefix.col(0)};
}

Vector dense_from_mps_right_to_left(const MpsState& state) {
  const int length = state.length();
  check_length(length, kMaxStateLength, "dense_from_mps_right_to_left");
  Matrix suffix = Matrix::Ones(1, 1);  // rows: bond, cols: basis of sites > n
  for (int n = length - 1; n >= 0; --n) {
    const auto& t = state.site(n);
    const Eigen::Index tail = suffix.cols();
    Matrix next(t.left(), kPhysDim * tail);
    for (int sigma = 0; sigma < kPhysDim; ++sigma) next.middleCols(sigma * tail, tail) = t.s[sigma] * suffix;
    suffix = std::move(next);
  }
  return suffix.row(0).transpose();
}

DenseState dense_product_state(int length, const Vector& local_state) {
  check_length(length, kMaxStateLength, "dense_product_state");
  Vector psi = Vector::Ones(1);
  for (int n = 0; n < length; ++n) {
    Vector next(psi.size() * kPhysDim);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      for (int sigma = 0; sigma < kPhysDim; ++sigma) next(i * kPhysDim + sigma) = psi(i) * local_state(sigma);
    }
    psi = std::move(next);
  }
  return DenseState{length, psi};
}

SparseMatrix two_site_operator(int length, int site_a, const Matrix2& op_a, int site_b, const Matrix2& op_b) {
  check_length(length, kMaxStateLength, "two_site_operator");
  const Eigen::Index dim = dim_of(length);
  std::vector<Eigen::Triplet<Complex>> entries;
  for (Eigen::Index col = 0; col < dim; ++col) {
    const int sa = static_cast<int>((col >> (length - 1 - site_a)) & 1);
    const int sb = static_cast<int>((col >> (length - 1 - site_b)) & 1);
    for (int ta = 0; ta < kPhysDim; ++ta) {
      for (int tb = 0; tb < kPhysDim; ++tb) {
        if (site_a == site_b && ta != tb) continue;
        Complex amp = site_a == site_b ? (op_a * op_b)(ta, sb) : op_a(ta, sa) * op_b(tb, sb);
        if (amp == Complex(0.0)) continue;
        Eigen::Index row = col;
        row &= ~(Eigen::Index{1} << (length - 1 - site_a));
        row |= Eigen::Index{ta} << (length - 1 - site_a);
        if (site_a != site_b) {
          row &= ~(Eigen::Index{1} << (length - 1 - site_b));
          row |= Eigen::Index{tb} << (length - 1 - site_b);
        }
        entries.emplace_back(row, col, amp);
      }
    }
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

SparseMatrix site_operator(int length, int site, const Matrix2& op) {
  return two_site_operator(length, site, op, site, pauli::identity());
}

SparseMatrix ising_hamiltonian(const IsingParams& params, int length) {
  const Eigen::Index dim = dim_of(length);
  SparseMatrix h(dim, dim);
  for (int i = 0; i + 1 < length; ++i) {
    h -= params.J * two_site_operator(length, i, pauli::z(), i + 1, pauli::z());
  }
  for (int i = 0; i < length; ++i) {
    h -= params.h * site_operator(length, i, pauli::z());
    h -= params.g * site_operator(length, i, pauli::x());
  }
  h.prune(Complex(0.0));
  return h;
}

SparseMatrix local_fields_operator(const LocalFieldCoefficients& fields) {
  const int length = static_cast<int>(fields.rows());
  SparseMatrix out(dim_of(length), dim_of(length));
  for (int n = 0; n < length; ++n) {
    for (int a = 0; a < kChannels; ++a) {
      if (fields(n, a) != 0.0) out += fields(n, a) * site_operator(length, n, pauli::channel(a));
    }
  }
  return out;
}

Matrix mpo_to_dense(const Mpo& mpo) {
  const int length = mpo.length();
  check_length(length, kMaxTangentLength + 2, "mpo_to_dense");
  const int w0 = mpo.sites.front().left_dim;
  std::vector<Matrix> acc(w0, Matrix::Zero(1, 1));
  acc[mpo.left_boundary](0, 0) = 1.0;
  for (int n = 0; n < length; ++n) {
    const auto& w = mpo.sites[n];
    const Eigen::Index block = acc[0].rows();
    std::vector<Matrix> next(w.right_dim, Matrix::Zero(block * kPhysDim, block * kPhysDim));
    for (int b = 0; b < w.left_dim; ++b) {
      for (int bp = 0; bp < w.right_dim; ++bp) {
        const Matrix2& op = w.at(b, bp);
        for (int r = 0; r < kPhysDim; ++r) {
          for (int c = 0; c < kPhysDim; ++c) {
            if (op(r, c) == Complex(0.0)) continue;
            // Kronecker product acc[b] (x) op, with the new site least significant.
            for (Eigen::Index i = 0; i < block; ++i) {
              for (Eigen::Index j = 0; j < block; ++j) {
                next[bp](i * kPhysDim + r, j * kPhysDim + c) += acc[b](i, j) * op(r, c);
              }
            }
          }
        }
      }
    }
    acc = std::move(next);
  }
  return acc[mpo.right_boundary];
}

DenseState dense_evolve(DenseState state, const SparseMatrix& hamiltonian, const FieldSchedule& fields, double dt,
                        int steps) {
  check_length(state.length, kMaxStateLength, "dense_evolve");
  const Eigen::Index dim = state.amplitudes.size();
  for (int k = 0; k < steps; ++k) {
    SparseMatrix total = hamiltonian;
    if (fields) total += local_fields_operator(fields(k));
    if (dim <= 256) {
      const Matrix dense = Matrix(total);
      state.amplitudes = expm_i_hermitian(dense, dt) * state.amplitudes;
    } else {
      auto apply = [&](const Vector& v) { return Vector(total * v); };
      state.amplitudes = expm_krylov(apply, state.amplitudes, dt, KrylovOptions{1e-14, 60});
    }
  }
  return state;
}

double expectation(const DenseState& state, const SparseMatrix& op) {
  return state.amplitudes.dot(op * state.amplitudes).real();
}

TangentBasis dense_tangent_basis(const MpsState& state, double cutoff) {
  const int length = state.length();
  check_length(length, kMaxTangentLength, "dense_tangent_basis");
  const Eigen::Index dim = dim_of(length);

  // prefix[n]: 2^n x D_n amplitudes of sites < n; suffix[n]: D_{n+1} x 2^(L-n-1).
  std::vector<Matrix> prefix(length + 1);
  std::vector<Matrix> suffix(length + 1);
  prefix[0] = Matrix::Ones(1, 1);
  for (int n = 0; n < length; ++n) {
    const auto& t = state.site(n);
    Matrix next(prefix[n].rows() * kPhysDim, t.right());
    for (Eigen::Index i = 0; i < prefix[n].rows(); ++i) {
      for (int sigma = 0; sigma < kPhysDim; ++sigma) next.row(i * kPhysDim + sigma) = prefix[n].row(i) * t.s[sigma];
    }
    prefix[n + 1] = std::move(next);
  }
  suffix[length - 1] = Matrix::Ones(1, 1);
  for (int n = length - 1; n > 0; --n) {
    const auto& t = state.site(n);
    const Eigen::Index tail = suffix[n].cols();
    Matrix next(t.left(), kPhysDim * tail);
    for (int sigma = 0; sigma < kPhysDim; ++sigma) next.middleCols(sigma * tail, tail) = t.s[sigma] * suffix[n];
    suffix[n - 1] = std::move(next);
  }

  Eigen::Index raw = 0;
  for (const auto& t : state.sites()) raw += t.size();
  Matrix derivatives = Matrix::Zero(dim, raw);
  Eigen::Index col = 0;
  for (int m = 0; m < length; ++m) {
    const auto& t = state.site(m);
    const Eigen::Index tail = dim_of(length - m - 1);
    for (int sigma = 0; sigma < kPhysDim; ++sigma) {
      for (Eigen::Index beta = 0; beta < t.right(); ++beta) {
        for (Eigen::Index alpha = 0; alpha < t.left(); ++alpha, ++col) {
          for (Eigen::Index il = 0; il < prefix[m].rows(); ++il) {
            const Complex left = prefix[m](il, alpha);
            if (left == Complex(0.0)) continue;
            const Eigen::Index base = (il * kPhysDim + sigma) * tail;
            derivatives.col(col).segment(base, tail) = left * suffix[m].row(beta).transpose();
          }
        }
      }
    }
  }

  Eigen::JacobiSVD<Matrix> svd(derivatives, Eigen::ComputeThinU);
  const RealVector& s = svd.singularValues();
  Eigen::Index rank = 0;
  const double top = s.size() ? s(0) : 0.0;
  while (rank < s.size() && s(rank) > cutoff * top) ++rank;
  return TangentBasis{svd.matrixU().leftCols(rank), raw, rank};
}

Vector dense_tangent_projection(const TangentBasis& tangent, const Vector& psi, const Matrix& op) {
  const Vector o_psi = op * psi;
  Vector projected = tangent.basis * (tangent.basis.adjoint() * o_psi);
  projected -= psi * psi.dot(o_psi);
  return projected;
}

double dense_tangent_bracket(const TangentBasis& tangent, const Vector& psi, const Matrix& op1, const Matrix& op2) {
  const Vector t1 = dense_tangent_projection(tangent, psi, op1);
  const Vector t2 = dense_tangent_projection(tangent, psi, op2);
  return -2.0 * t1.dot(t2).imag();
}

double dense_tangent_bracket(const MpsState& state, const Matrix& op1, const Matrix& op2) {
  const auto tangent = dense_tangent_basis(state);
  const Vector psi = dense_from_mps(state).amplitudes;
  return dense_tangent_bracket(tangent, psi, op1, op2);
}

}  // namespace tdvpl::ed
