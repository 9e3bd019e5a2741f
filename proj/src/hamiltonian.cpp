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

#include "tdvpl/hamiltonian.hpp"

#include <cmath>
#include <sstream>

#include "tdvpl/errors.hpp"
#include "tdvpl/linalg.hpp"

namespace tdvpl {

MpoSite::MpoSite(int left, int right)
    : left_dim(left), right_dim(right), blocks(static_cast<std::size_t>(left * right), Matrix2::Zero()) {}

void MpoSite::refresh_sparsity() {
  nonzero.clear();
  for (int b = 0; b < left_dim; ++b) {
    for (int bp = 0; bp < right_dim; ++bp) {
      if (!at(b, bp).isZero(0.0)) nonzero.emplace_back(b, bp);
    }
  }
}

int Mpo::bond_dim() const {
  int dim = 0;
  for (const auto& w : sites) dim = std::max({dim, w.left_dim, w.right_dim});
  return dim;
}

Mpo build_tilted_ising(const IsingParams& params, int length) {
  require(length >= 2, "build_tilted_ising: need L >= 2");
  require(std::isfinite(params.J) && std::isfinite(params.h) && std::isfinite(params.g),
          "build_tilted_ising: non-finite parameters");
  // Lower-triangular form: bond 2 = "nothing placed", 1 = "Z placed", 0 = "done".
  Mpo mpo;
  mpo.left_boundary = 2;
  mpo.right_boundary = 0;
  mpo.local_slot = std::make_pair(2, 0);
  for (int n = 0; n < length; ++n) {
    MpoSite w(3, 3);
    w.at(0, 0) = pauli::identity();
    w.at(1, 0) = pauli::z();
    w.at(2, 0) = -(params.h * pauli::z() + params.g * pauli::x());
    w.at(2, 1) = -params.J * pauli::z();
    w.at(2, 2) = pauli::identity();
    w.refresh_sparsity();
    mpo.sites.push_back(std::move(w));
  }
  return mpo;
}

Mpo product_operator_mpo(int length, const std::vector<std::pair<int, Matrix2>>& factors) {
  Mpo mpo;
  for (int n = 0; n < length; ++n) {
    MpoSite w(1, 1);
    w.at(0, 0) = pauli::identity();
    mpo.sites.push_back(std::move(w));
  }
  for (const auto& [site, op] : factors) {
    require(site >= 0 && site < length, "product_operator_mpo: site out of range");
    mpo.sites[site].at(0, 0) = op * mpo.sites[site].at(0, 0);
  }
  for (auto& w : mpo.sites) w.refresh_sparsity();
  return mpo;
}

Mpo local_operator_mpo(int length, int site, const Matrix2& op) {
  require(site >= 0 && site < length, "local_operator_mpo: site out of range");
  return product_operator_mpo(length, {{site, op}});
}

Mpo with_local_fields(const Mpo& hamiltonian, const LocalFieldCoefficients& fields) {
  require(fields.rows() == hamiltonian.length(), "with_local_fields: coefficient rows must equal L");
  require(hamiltonian.local_slot.has_value(), "with_local_fields: operator has no one-site slot");
  require(fields.allFinite(), "with_local_fields: non-finite coefficients");
  Mpo out = hamiltonian;
  const auto [b, bp] = *hamiltonian.local_slot;
  for (int n = 0; n < out.length(); ++n) {
    Matrix2 extra = Matrix2::Zero();
    for (int a = 0; a < kChannels; ++a) extra += fields(n, a) * pauli::channel(a);
    out.sites[n].at(b, bp) += extra;
    out.sites[n].refresh_sparsity();
  }
  return out;
}

Environment left_boundary_environment(const Mpo& mpo) {
  const int w = mpo.sites.front().left_dim;
  Environment env(w, Matrix::Zero(1, 1));
  env[mpo.left_boundary](0, 0) = 1.0;
  return env;
}

Environment right_boundary_environment(const Mpo& mpo) {
  const int w = mpo.sites.back().right_dim;
  Environment env(w, Matrix::Zero(1, 1));
  env[mpo.right_boundary](0, 0) = 1.0;
  return env;
}

Environment extend_left(const Environment& env, const SiteTensor& bra, const SiteTensor& ket, const MpoSite& w) {
  Environment out(w.right_dim, Matrix::Zero(bra.right(), ket.right()));
  // env[b] * ket[sigma], computed lazily per b.
  std::vector<std::array<Matrix, kPhysDim>> env_ket(w.left_dim);
  std::vector<bool> ready(w.left_dim, false);
  for (const auto& [b, bp] : w.nonzero) {
    if (!ready[b]) {
      for (int sg = 0; sg < kPhysDim; ++sg) env_ket[b][sg].noalias() = env[b] * ket.s[sg];
      ready[b] = true;
    }
    const Matrix2& op = w.at(b, bp);
    for (int sp = 0; sp < kPhysDim; ++sp) {
      Matrix mixed;
      bool any = false;
      for (int sg = 0; sg < kPhysDim; ++sg) {
        if (op(sp, sg) == Complex(0.0)) continue;
        if (!any) {
          mixed = op(sp, sg) * env_ket[b][sg];
          any = true;
        } else {
          mixed += op(sp, sg) * env_ket[b][sg];
        }
      }
      if (any) out[bp].noalias() += bra.s[sp].adjoint() * mixed;
    }
  }
  return out;
}

Environment extend_right(const Environment& env, const SiteTensor& bra, const SiteTensor& ket, const MpoSite& w) {
  Environment out(w.left_dim, Matrix::Zero(ket.left(), bra.left()));
  std::vector<std::array<Matrix, kPhysDim>> ket_env(w.right_dim);
  std::vector<bool> ready(w.right_dim, false);
  for (const auto& [b, bp] : w.nonzero) {
    if (!ready[bp]) {
      for (int sg = 0; sg < kPhysDim; ++sg) ket_env[bp][sg].noalias() = ket.s[sg] * env[bp];
      ready[bp] = true;
    }
    const Matrix2& op = w.at(b, bp);
    for (int sp = 0; sp < kPhysDim; ++sp) {
      Matrix mixed;
      bool any = false;
      for (int sg = 0; sg < kPhysDim; ++sg) {
        if (op(sp, sg) == Complex(0.0)) continue;
        if (!any) {
          mixed = op(sp, sg) * ket_env[bp][sg];
          any = true;
        } else {
          mixed += op(sp, sg) * ket_env[bp][sg];
        }
      }
      if (any) out[b].noalias() += mixed * bra.s[sp].adjoint();
    }
  }
  return out;
}

SiteTensor apply_site_hamiltonian(const Environment& left, const MpoSite& w, const Environment& right,
                                  const SiteTensor& x) {
  SiteTensor y(x.left(), x.right());
  std::vector<std::array<Matrix, kPhysDim>> left_x(w.left_dim);
  std::vector<bool> ready(w.left_dim, false);
  // Group the nonzero blocks by their right MPO index.
  for (int bp = 0; bp < w.right_dim; ++bp) {
    std::array<Matrix, kPhysDim> z;
    bool any_block = false;
    for (const auto& [b, bq] : w.nonzero) {
      if (bq != bp) continue;
      if (!ready[b]) {
        for (int sg = 0; sg < kPhysDim; ++sg) left_x[b][sg].noalias() = left[b] * x.s[sg];
        ready[b] = true;
      }
      const Matrix2& op = w.at(b, bp);
      for (int sp = 0; sp < kPhysDim; ++sp) {
        for (int sg = 0; sg < kPhysDim; ++sg) {
          if (op(sp, sg) == Complex(0.0)) continue;
          if (z[sp].size() == 0) {
            z[sp] = op(sp, sg) * left_x[b][sg];
          } else {
            z[sp] += op(sp, sg) * left_x[b][sg];
          }
        }
      }
      any_block = true;
    }
    if (!any_block) continue;
    for (int sp = 0; sp < kPhysDim; ++sp) {
      if (z[sp].size() != 0) y.s[sp].noalias() += z[sp] * right[bp];
    }
  }
  return y;
}

Matrix apply_bond_hamiltonian(const Environment& left, const Environment& right, const Matrix& c) {
  require(left.size() == right.size(), "apply_bond_hamiltonian: MPO bond mismatch");
  Matrix out = Matrix::Zero(c.rows(), c.cols());
  for (std::size_t b = 0; b < left.size(); ++b) {
    if (left[b].isZero(0.0) || right[b].isZero(0.0)) continue;
    out.noalias() += left[b] * c * right[b];
  }
  return out;
}

Matrix dense_site_hamiltonian(const Environment& left, const MpoSite& w, const Environment& right,
                              Eigen::Index left_dim, Eigen::Index right_dim) {
  const Eigen::Index n = kPhysDim * left_dim * right_dim;
  Matrix h(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e(j) = 1.0;
    h.col(j) = apply_site_hamiltonian(left, w, right, SiteTensor::unflatten(e, left_dim, right_dim)).flatten();
  }
  return h;
}

Complex mpo_expectation(const MpsState& bra, const Mpo& op, const MpsState& ket) {
  require(bra.length() == op.length() && ket.length() == op.length(), "mpo_expectation: length mismatch");
  Environment env = left_boundary_environment(op);
  for (int n = 0; n < op.length(); ++n) env = extend_left(env, bra.site(n), ket.site(n), op.sites[n]);
  return env[op.right_boundary](0, 0);
}

double energy(const MpsState& state, const Mpo& hamiltonian) {
  const Complex e = mpo_expectation(state, hamiltonian, state);
  if (std::abs(e.imag()) > 1e-9 * std::max(1.0, std::abs(e.real()))) {
    throw NumericalError("energy: imaginary part " + std::to_string(e.imag()));
  }
  return e.real();
}

Matrix effective_site_hamiltonian(const Mpo& hamiltonian, const MpsState& state, int site) {
  require(hamiltonian.length() == state.length(), "effective_site_hamiltonian: length mismatch");
  if (state.center() != site) {
    std::ostringstream msg;
    msg << "effective_site_hamiltonian: state is not canonical at site " << site;
    throw ContractViolation(msg.str());
  }
  Environment left = left_boundary_environment(hamiltonian);
  for (int n = 0; n < site; ++n) left = extend_left(left, state.site(n), state.site(n), hamiltonian.sites[n]);
  Environment right = right_boundary_environment(hamiltonian);
  for (int n = state.length() - 1; n > site; --n) {
    right = extend_right(right, state.site(n), state.site(n), hamiltonian.sites[n]);
  }
  const auto& t = state.site(site);
  return dense_site_hamiltonian(left, hamiltonian.sites[site], right, t.left(), t.right());
}

}  // namespace tdvpl
