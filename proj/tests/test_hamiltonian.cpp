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

#include "doctest.h"
#include "support.hpp"
#include "tdvpl/ed_oracle.hpp"
#include "tdvpl/errors.hpp"
#include "tdvpl/hamiltonian.hpp"
#include "tdvpl/linalg.hpp"

using namespace tdvpl;

TEST_SUITE("hamiltonian") {
  TEST_CASE("ising mpo equals the Pauli-string sum") {
    const IsingParams p{1.0, 0.5, -1.05};
    for (int length : {2, 3, 6}) {
      const Matrix mpo = ed::mpo_to_dense(build_tilted_ising(p, length));
      const Matrix ref = Matrix(ed::ising_hamiltonian(p, length));
      CHECK((mpo - ref).norm() < 1e-12);
    }
    CHECK_THROWS_AS(build_tilted_ising(p, 1), ContractViolation);
  }

  TEST_CASE("local fields fold into the one-site slot") {
    Rng rng(3);
    const int length = 5;
    LocalFieldCoefficients c = LocalFieldCoefficients::Random(length, 3);
    const IsingParams p{0.7, -0.2, 0.4};
    const Matrix mpo = ed::mpo_to_dense(with_local_fields(build_tilted_ising(p, length), c));
    const Matrix ref = Matrix(ed::ising_hamiltonian(p, length)) + Matrix(ed::local_fields_operator(c));
    CHECK((mpo - ref).norm() < 1e-12);
  }

  TEST_CASE("energy agrees with the dense expectation") {
    Rng rng(4);
    const IsingParams p;
    const auto psi = haar_random_mps(7, 4, rng);
    const auto dense = ed::dense_from_mps(psi);
    CHECK(std::abs(energy(psi, build_tilted_ising(p, 7)) - ed::expectation(dense, ed::ising_hamiltonian(p, 7))) < 1e-11);
  }

  TEST_CASE("product state energy in closed form") {
    const IsingParams p;
    const auto psi = product_state(8, tdvpl::testing::spin_up());
    // All spins up: -J (L-1) - h L.
    CHECK(std::abs(energy(psi, build_tilted_ising(p, 8)) - (-7.0 * p.J - 8.0 * p.h)) < 1e-13);
  }

  TEST_CASE("effective site hamiltonian is Hermitian and reproduces the energy") {
    Rng rng(5);
    const IsingParams p;
    const auto h = build_tilted_ising(p, 6);
    auto psi = haar_random_mps(6, 4, rng);
    for (int site = 0; site < 6; ++site) {
      make_canonical(psi, site);
      const Matrix heff = effective_site_hamiltonian(h, psi, site);
      CHECK(hermiticity_residual(heff) < 1e-12);
      const Vector x = psi.site(site).flatten();
      CHECK(std::abs(x.dot(heff * x).real() - energy(psi, h)) < 1e-11);
      const SiteTensor y = apply_site_hamiltonian(
          [&] {
            Environment env = left_boundary_environment(h);
            for (int n = 0; n < site; ++n) env = extend_left(env, psi.site(n), psi.site(n), h.sites[n]);
            return env;
          }(),
          h.sites[site],
          [&] {
            Environment env = right_boundary_environment(h);
            for (int n = 5; n > site; --n) env = extend_right(env, psi.site(n), psi.site(n), h.sites[n]);
            return env;
          }(),
          psi.site(site));
      CHECK((y.flatten() - heff * x).norm() < 1e-11);
    }
    make_canonical(psi, 2);
    CHECK_THROWS_AS(effective_site_hamiltonian(h, psi, 4), ContractViolation);
  }

  TEST_CASE("mpo expectation of a product operator") {
    Rng rng(6);
    const auto psi = haar_random_mps(5, 4, rng);
    const Matrix2 a = tdvpl::testing::random_hermitian2(rng);
    const Matrix2 b = tdvpl::testing::random_hermitian2(rng);
    const Mpo op = product_operator_mpo(5, {{1, a}, {3, b}});
    const auto dense = ed::dense_from_mps(psi);
    const Complex ref = dense.amplitudes.dot(ed::two_site_operator(5, 1, a, 3, b) * dense.amplitudes);
    CHECK(std::abs(mpo_expectation(psi, op, psi) - ref) < 1e-12);
  }
}
