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

#include "tdvpl/mps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tdvpl/errors.hpp"
#include "tdvpl/linalg.hpp"

namespace tdvpl {

SiteTensor::SiteTensor(Eigen::Index left, Eigen::Index right) {
  for (auto& m : s) m = Matrix::Zero(left, right);
}

Matrix SiteTensor::left_grouped() const {
  const Eigen::Index l = left();
  Matrix out(kPhysDim * l, right());
  for (int sigma = 0; sigma < kPhysDim; ++sigma) out.middleRows(sigma * l, l) = s[sigma];
  return out;
}

Matrix SiteTensor::right_grouped() const {
  const Eigen::Index r = right();
  Matrix out(left(), kPhysDim * r);
  for (int sigma = 0; sigma < kPhysDim; ++sigma) out.middleCols(sigma * r, r) = s[sigma];
  return out;
}

SiteTensor SiteTensor::from_left_grouped(const Matrix& m, Eigen::Index left) {
  require(m.rows() == kPhysDim * left, "from_left_grouped: row count is not d*left");
  SiteTensor t;
  for (int sigma = 0; sigma < kPhysDim; ++sigma) t.s[sigma] = m.middleRows(sigma * left, left);
  return t;
}

SiteTensor SiteTensor::from_right_grouped(const Matrix& m, Eigen::Index right) {
  require(m.cols() == kPhysDim * right, "from_right_grouped: column count is not d*right");
  SiteTensor t;
  for (int sigma = 0; sigma < kPhysDim; ++sigma) t.s[sigma] = m.middleCols(sigma * right, right);
  return t;
}

Vector SiteTensor::flatten() const {
  const Eigen::Index block = left() * right();
  Vector v(kPhysDim * block);
  for (int sigma = 0; sigma < kPhysDim; ++sigma) {
    v.segment(sigma * block, block) = Eigen::Map<const Vector>(s[sigma].data(), block);
  }
  return v;
}

SiteTensor SiteTensor::unflatten(const Vector& v, Eigen::Index left, Eigen::Index right) {
  const Eigen::Index block = left * right;
  require(v.size() == kPhysDim * block, "unflatten: size mismatch");
  SiteTensor t;
  for (int sigma = 0; sigma < kPhysDim; ++sigma) {
    t.s[sigma] = Eigen::Map<const Matrix>(v.data() + sigma * block, left, right);
  }
  return t;
}

double SiteTensor::norm() const {
  double acc = 0.0;
  for (const auto& m : s) acc += m.squaredNorm();
  return std::sqrt(acc);
}

MpsState::MpsState(std::vector<SiteTensor> sites, std::optional<int> center)
    : sites_(std::move(sites)), center_(center) {
  require(!sites_.empty(), "MpsState: empty chain");
  require(sites_.front().left() == 1 && sites_.back().right() == 1, "MpsState: boundary bonds must be 1");
  for (std::size_t n = 0; n + 1 < sites_.size(); ++n) {
    if (sites_[n].right() != sites_[n + 1].left()) {
      std::ostringstream msg;
      msg << "MpsState: bond mismatch between sites " << n << " and " << n + 1;
      throw ContractViolation(msg.str());
    }
  }
  for (const auto& t : sites_) {
    require(t.right() <= kPhysDim * t.left() && t.left() <= kPhysDim * t.right(),
            "MpsState: bond dimensions exceed the physical schedule");
  }
  if (center_) require(*center_ >= 0 && *center_ < length(), "MpsState: center out of range");
}

std::vector<Eigen::Index> MpsState::bond_dims() const {
  std::vector<Eigen::Index> dims;
  dims.reserve(sites_.size() + 1);
  for (const auto& t : sites_) dims.push_back(t.left());
  dims.push_back(sites_.back().right());
  return dims;
}

Eigen::Index MpsState::max_bond_dim() const {
  const auto dims = bond_dims();
  return *std::max_element(dims.begin(), dims.end());
}

std::vector<Eigen::Index> bond_schedule(int length, Eigen::Index d_max) {
  require(length >= 1 && d_max >= 1, "bond_schedule: need L >= 1 and D >= 1");
  std::vector<Eigen::Index> dims(length + 1);
  for (int n = 0; n <= length; ++n) {
    const int k = std::min(n, length - n);
    Eigen::Index full = 1;
    for (int i = 0; i < k && full < d_max; ++i) full *= kPhysDim;
    dims[n] = std::min(full, d_max);
  }
  return dims;
}

MpsState product_state(int length, const Vector& local_state) {
  require(length >= 1, "product_state: need L >= 1");
  require(local_state.size() == kPhysDim, "product_state: local state must have 2 entries");
  require(std::abs(local_state.squaredNorm() - 1.0) < 1e-12, "product_state: local state is not normalized");
  std::vector<SiteTensor> sites(length, SiteTensor(1, 1));
  for (auto& t : sites) {
    for (int sigma = 0; sigma < kPhysDim; ++sigma) t.s[sigma](0, 0) = local_state(sigma);
  }
  return MpsState(std::move(sites), 0);
}

MpsState embed_in_bond_dims(const MpsState& state, Eigen::Index d_max) {
  const auto dims = bond_schedule(state.length(), d_max);
  std::vector<SiteTensor> sites;
  sites.reserve(state.length());
  for (int n = 0; n < state.length(); ++n) {
    const auto& src = state.site(n);
    require(src.left() <= dims[n] && src.right() <= dims[n + 1],
            "embed_in_bond_dims: state already exceeds the target bond dimensions");
    SiteTensor t(dims[n], dims[n + 1]);
    for (int sigma = 0; sigma < kPhysDim; ++sigma) {
      t.s[sigma].topLeftCorner(src.left(), src.right()) = src.s[sigma];
    }
    sites.push_back(std::move(t));
  }
  MpsState out(std::move(sites), std::nullopt);
  make_canonical(out, out.length() - 1);
  return out;
}

void make_canonical(MpsState& state, int center) {
  const int length = state.length();
  require(center >= 0 && center < length, "canonicalize: site index out of range");
  auto& sites = state.sites();
  for (int n = 0; n < center; ++n) {
    const Eigen::Index left = sites[n].left();
    auto qr = qr_decompose(sites[n].left_grouped());
    sites[n] = SiteTensor::from_left_grouped(qr.q, left);
    for (auto& m : sites[n + 1].s) m = qr.r * m;
  }
  for (int n = length - 1; n > center; --n) {
    const Eigen::Index right = sites[n].right();
    // M = C Q with Q right-isometric, from the QR of M^dagger.
    auto qr = qr_decompose(sites[n].right_grouped().adjoint());
    sites[n] = SiteTensor::from_right_grouped(qr.q.adjoint(), right);
    const Matrix c = qr.r.adjoint();
    for (auto& m : sites[n - 1].s) m = m * c;
  }
  state.set_center(center);
}

MpsState canonicalize(MpsState state, int center) {
  make_canonical(state, center);
  return state;
}

double left_isometry_residual(const SiteTensor& a) {
  Matrix acc = Matrix::Zero(a.right(), a.right());
  for (const auto& m : a.s) acc.noalias() += m.adjoint() * m;
  return (acc - Matrix::Identity(a.right(), a.right())).cwiseAbs().maxCoeff();
}

double right_isometry_residual(const SiteTensor& a) {
  Matrix acc = Matrix::Zero(a.left(), a.left());
  for (const auto& m : a.s) acc.noalias() += m * m.adjoint();
  return (acc - Matrix::Identity(a.left(), a.left())).cwiseAbs().maxCoeff();
}

namespace {

Matrix transfer(const Matrix& env, const SiteTensor& bra, const SiteTensor& ket, const Matrix2& op) {
  Matrix out = Matrix::Zero(bra.right(), ket.right());
  for (int sp = 0; sp < kPhysDim; ++sp) {
    for (int sg = 0; sg < kPhysDim; ++sg) {
      if (op(sp, sg) == Complex(0.0)) continue;
      out.noalias() += op(sp, sg) * (bra.s[sp].adjoint() * (env * ket.s[sg]));
    }
  }
  return out;
}

Matrix transfer(const Matrix& env, const SiteTensor& bra, const SiteTensor& ket) {
  Matrix out = Matrix::Zero(bra.right(), ket.right());
  for (int sigma = 0; sigma < kPhysDim; ++sigma) {
    out.noalias() += bra.s[sigma].adjoint() * (env * ket.s[sigma]);
  }
  return out;
}

}  // namespace

Complex overlap(const MpsState& bra, const MpsState& ket) {
  require(bra.length() == ket.length(), "overlap: chain lengths differ");
  Matrix env = Matrix::Ones(1, 1);
  for (int n = 0; n < bra.length(); ++n) env = transfer(env, bra.site(n), ket.site(n));
  return env(0, 0);
}

double norm_squared(const MpsState& state) { return overlap(state, state).real(); }

double expect_local(const MpsState& state, const Matrix2& op, int site) {
  require(site >= 0 && site < state.length(), "expect_local: site out of range");
  require(hermiticity_residual(op) < 1e-12, "expect_local: operator is not Hermitian");
  Matrix env = Matrix::Ones(1, 1);
  for (int n = 0; n < state.length(); ++n) {
    env = n == site ? transfer(env, state.site(n), state.site(n), op)
                    : transfer(env, state.site(n), state.site(n));
  }
  const Complex value = env(0, 0);
  if (std::abs(value.imag()) > 1e-10) {
    throw NumericalError("expect_local: expectation value has imaginary part " + std::to_string(value.imag()));
  }
  return value.real();
}

void apply_local(MpsState& state, const Matrix2& op, int site) {
  require(site >= 0 && site < state.length(), "apply_local: site out of range");
  auto& t = state.site(site);
  std::array<Matrix, kPhysDim> out;
  for (int sp = 0; sp < kPhysDim; ++sp) {
    out[sp] = op(sp, 0) * t.s[0];
    for (int sg = 1; sg < kPhysDim; ++sg) out[sp] += op(sp, sg) * t.s[sg];
  }
  t.s = std::move(out);
}

SchmidtSpectrum schmidt_spectrum(const MpsState& state, int bond) {
  const int length = state.length();
  require(bond >= 0 && bond <= length, "schmidt_spectrum: bond out of range");
  SchmidtSpectrum out;
  out.bond = bond;
  if (bond == 0 || bond == length) {
    out.values = RealVector::Ones(1);
    return out;
  }
  const MpsState c = canonicalize(state, bond - 1);
  out.values = svd(c.site(bond - 1).left_grouped()).s;
  return out;
}

std::vector<SchmidtSpectrum> all_schmidt_spectra(const MpsState& state) {
  const int length = state.length();
  MpsState c = state.center() == length - 1 ? state : canonicalize(state, length - 1);
  std::vector<SchmidtSpectrum> out(std::max(length - 1, 0));
  auto& sites = c.sites();
  for (int n = length - 1; n >= 1; --n) {
    const Eigen::Index right = sites[n].right();
    auto f = svd(sites[n].right_grouped());
    out[n - 1].bond = n;
    out[n - 1].values = f.s;
    sites[n] = SiteTensor::from_right_grouped(f.vh, right);
    const Matrix us = f.u * f.s.cast<Complex>().asDiagonal();
    for (auto& m : sites[n - 1].s) m = m * us;
  }
  return out;
}

double von_neumann_entropy(const RealVector& schmidt_values) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < schmidt_values.size(); ++k) {
    const double lambda = schmidt_values(k);
    if (lambda < kSchmidtCutoff) continue;
    const double p = lambda * lambda;
    s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

double von_neumann_entropy(const SchmidtSpectrum& spectrum) { return von_neumann_entropy(spectrum.values); }

Matrix haar_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return qr_decompose(g).q;
}

MpsState haar_random_mps(int length, Eigen::Index d_max, Rng& rng) {
  const auto dims = bond_schedule(length, d_max);
  std::vector<SiteTensor> sites;
  sites.reserve(length);
  for (int n = 0; n < length; ++n) {
    sites.push_back(SiteTensor::from_left_grouped(haar_isometry(kPhysDim * dims[n], dims[n + 1], rng), dims[n]));
  }
  return MpsState(std::move(sites), length - 1);
}

}  // namespace tdvpl
