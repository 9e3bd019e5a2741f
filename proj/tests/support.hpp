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

#ifndef TDVPL_TESTS_SUPPORT_HPP
#define TDVPL_TESTS_SUPPORT_HPP

#include <random>

#include "tdvpl/mps.hpp"
#include "tdvpl/types.hpp"

namespace tdvpl::testing {

inline Matrix random_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(normal(rng), normal(rng));
  }
  return m;
}

inline Matrix random_hermitian(Eigen::Index n, Rng& rng) {
  const Matrix a = random_complex(n, n, rng);
  return 0.5 * (a + a.adjoint());
}

inline Matrix2 random_hermitian2(Rng& rng) { return random_hermitian(2, rng); }

inline Vector normalized_local(Complex up, Complex down) {
  Vector v(2);
  v << up, down;
  return v.normalized();
}

inline Vector spin_up() { return normalized_local(1.0, 0.0); }

/// Generic MPS with unnormalized, non-canonical random tensors.
inline MpsState random_raw_mps(int length, Eigen::Index d_max, Rng& rng) {
  const auto dims = bond_schedule(length, d_max);
  std::vector<SiteTensor> sites;
  for (int n = 0; n < length; ++n) {
    SiteTensor t(dims[n], dims[n + 1]);
    for (auto& m : t.s) m = random_complex(dims[n], dims[n + 1], rng);
    sites.push_back(std::move(t));
  }
  return MpsState(std::move(sites), std::nullopt);
}

}  // namespace tdvpl::testing

#endif  // TDVPL_TESTS_SUPPORT_HPP
