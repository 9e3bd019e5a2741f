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

#ifndef TDVPL_KRYLOV_HPP
#define TDVPL_KRYLOV_HPP

#include <cmath>
#include <vector>

#include "tdvpl/errors.hpp"
#include "tdvpl/linalg.hpp"
#include "tdvpl/types.hpp"

namespace tdvpl {

struct KrylovOptions {
  double tolerance = 1e-13;  // relative to |v|
  int max_dim = 40;
};

/// exp(-i tau H) v for a Hermitian H given only through `apply(x) -> H x`.
///
/// Lanczos with full re-orthogonalization; the small tridiagonal problem is
/// exponentiated exactly. If the subspace limit is hit before the a-posteriori
/// error estimate drops below tolerance, tau is split in two.
template <typename Apply>
Vector expm_krylov(Apply&& apply, const Vector& v, double tau, const KrylovOptions& options = {}) {
  const double norm = v.norm();
  const Eigen::Index n = v.size();
  if (norm == 0.0 || tau == 0.0) return v;
  const int max_dim = static_cast<int>(std::min<Eigen::Index>(options.max_dim, n));

  std::vector<Vector> basis;
  basis.reserve(max_dim + 1);
  basis.push_back(v / norm);
  std::vector<double> alpha;
  std::vector<double> beta;

  RealVector coeffs;
  for (int k = 0; k < max_dim; ++k) {
    Vector w = apply(basis[k]);
    const Complex a = basis[k].dot(w);
    if (std::abs(a.imag()) > 1e-8 * (std::abs(a.real()) + 1.0)) {
      throw NumericalError("expm_krylov: generator is not Hermitian (imaginary Rayleigh quotient " +
                           std::to_string(a.imag()) + ")");
    }
    alpha.push_back(a.real());
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) w -= q * q.dot(w);
    }
    const double b = w.norm();

    const int dim = k + 1;
    RealMatrix t = RealMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(t);
    const RealMatrix& u = eig.eigenvectors();
    Vector phases(dim);
    for (int i = 0; i < dim; ++i) phases(i) = std::exp(Complex(0.0, -tau * eig.eigenvalues()(i)));
    const Vector small = u.cast<Complex>() * phases.asDiagonal() * u.row(0).transpose().cast<Complex>();

    const bool invariant = b < 1e-13 * (std::abs(a.real()) + 1.0);
    const double estimate = b * std::abs(small(dim - 1));
    if (invariant || estimate < options.tolerance || dim == n) {
      Vector out = Vector::Zero(n);
      for (int i = 0; i < dim; ++i) out += basis[i] * small(i);
      return out * norm;
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  // Subspace exhausted without convergence: halve the step.
  const Vector half = expm_krylov(apply, v, 0.5 * tau, options);
  return expm_krylov(apply, half, 0.5 * tau, options);
}

}  // namespace tdvpl

#endif  // TDVPL_KRYLOV_HPP
