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

#ifndef TDVPL_LINALG_HPP
#define TDVPL_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

#include "tdvpl/errors.hpp"
#include "tdvpl/types.hpp"

// Dense factorizations and matrix functions. Every routine is pure and
// reentrant; sign and phase conventions are fixed so that identical input
// bytes give identical output bytes.

namespace tdvpl {

namespace detail {

template <typename Scalar>
Scalar unit_phase(const Scalar& x) {
  using std::abs;
  const auto magnitude = abs(x);
  if (magnitude == 0) return Scalar(1);
  return x / magnitude;
}

template <typename Scalar>
using DenseOf = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Rotate each column so that its first largest-magnitude entry is real and
// positive.
template <typename Scalar>
void fix_column_phases(DenseOf<Scalar>& m) {
  using std::abs;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double a = abs(m(i, j));
      if (a > best * (1.0 + 1e-12)) {
        best = a;
        pivot = i;
      }
    }
    if (best > 0) m.col(j) *= Scalar(1) / unit_phase(m(pivot, j));
  }
}

}  // namespace detail

template <typename Scalar>
struct QrResult {
  detail::DenseOf<Scalar> q;
  detail::DenseOf<Scalar> r;
};

/// Thin QR with a non-negative real diagonal in R.
template <typename Derived>
QrResult<typename Derived::Scalar> qr_decompose(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Dense = detail::DenseOf<Scalar>;
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  if (rows < cols) {
    std::ostringstream msg;
    msg << "qr_decompose: need rows >= cols, got " << rows << "x" << cols;
    throw ContractViolation(msg.str());
  }
  Eigen::HouseholderQR<Dense> qr(m.eval());
  QrResult<Scalar> out;
  out.q = qr.householderQ() * Dense::Identity(rows, cols);
  out.r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < cols; ++k) {
    const Scalar phase = detail::unit_phase(out.r(k, k));
    out.q.col(k) *= phase;
    out.r.row(k) *= Eigen::numext::conj(phase);
    out.r(k, k) = Scalar(std::abs(out.r(k, k)));
  }
  return out;
}

template <typename Scalar>
struct SvdResult {
  detail::DenseOf<Scalar> u;
  RealVector s;
  detail::DenseOf<Scalar> vh;
};

/// Thin SVD, singular values descending, phases of U columns fixed.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Dense = detail::DenseOf<Scalar>;
  Eigen::BDCSVD<Dense> solver(m.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    Eigen::JacobiSVD<Dense> fallback(m.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector s = fallback.singularValues();
    std::ostringstream msg;
    msg << "svd did not converge (" << m.rows() << "x" << m.cols()
        << ", condition estimate " << (s.size() ? s(0) / std::max(s(s.size() - 1), 1e-300) : 0.0) << ")";
    throw NumericalError(msg.str());
  }
  SvdResult<Scalar> out{solver.matrixU(), solver.singularValues(), solver.matrixV().adjoint()};
  for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
    Eigen::Index pivot = 0;
    out.u.col(j).cwiseAbs().maxCoeff(&pivot);
    const Scalar phase = detail::unit_phase(out.u(pivot, j));
    if (phase != Scalar(1) && std::abs(out.u(pivot, j)) > 0) {
      out.u.col(j) *= Eigen::numext::conj(phase);
      out.vh.row(j) *= phase;
    }
  }
  return out;
}

template <typename Derived>
double hermiticity_residual(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Scalar>
struct EigResult {
  RealVector values;
  detail::DenseOf<Scalar> vectors;
};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
template <typename Derived>
EigResult<typename Derived::Scalar> hermitian_eig(const Eigen::MatrixBase<Derived>& m,
                                                  double tolerance = 1e-10) {
  using Scalar = typename Derived::Scalar;
  using Dense = detail::DenseOf<Scalar>;
  if (m.rows() != m.cols()) throw ContractViolation("hermitian_eig: matrix is not square");
  const double residual = hermiticity_residual(m);
  if (residual > tolerance) {
    std::ostringstream msg;
    msg << "hermitian_eig: input is not Hermitian (residual " << residual << ")";
    throw ContractViolation(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Dense> solver(m.eval());
  if (solver.info() != Eigen::Success) throw NumericalError("hermitian_eig: no convergence");
  EigResult<Scalar> out{solver.eigenvalues(), solver.eigenvectors()};
  detail::fix_column_phases<Scalar>(out.vectors);
  return out;
}

/// exp(-i s h) for Hermitian h, through its eigen-decomposition.
template <typename Derived>
Matrix expm_i_hermitian(const Eigen::MatrixBase<Derived>& h, double s) {
  const auto eig = hermitian_eig(h);
  const Eigen::Index n = eig.values.size();
  Vector phases(n);
  for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::exp(Complex(0.0, -s * eig.values(k)));
  const Matrix v = eig.vectors.template cast<Complex>();
  return v * phases.asDiagonal() * v.adjoint();
}

/// 2-norm condition number from the singular values.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& a) {
  using Dense = detail::DenseOf<typename Derived::Scalar>;
  Eigen::JacobiSVD<Dense> solver(a.eval());
  const RealVector s = solver.singularValues();
  if (s.size() == 0) return 1.0;
  const double smallest = s(s.size() - 1);
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

/// Solves a x = b for a small, well-conditioned square matrix.
/// `context` names the caller's object (e.g. the site) in error messages.
template <typename DerivedA, typename DerivedB>
auto solve_small_linear(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                        const std::string& context = "", double max_condition = 1e8) {
  using Scalar = typename DerivedA::Scalar;
  using Dense = detail::DenseOf<Scalar>;
  using Column = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw ContractViolation("solve_small_linear: dimension mismatch");
  }
  const double cond = condition_number(a);
  if (!(cond < max_condition)) {
    std::ostringstream msg;
    msg << "solve_small_linear: ill-conditioned system";
    if (!context.empty()) msg << " at " << context;
    msg << " (condition " << cond << ")";
    throw NumericalError(msg.str());
  }
  const Column x = Eigen::FullPivLU<Dense>(a.eval()).solve(b.eval());
  return x;
}

}  // namespace tdvpl

#endif  // TDVPL_LINALG_HPP
