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

#ifndef TDVPL_TDVP_HPP
#define TDVPL_TDVP_HPP

#include "tdvpl/hamiltonian.hpp"
#include "tdvpl/krylov.hpp"
#include "tdvpl/mps.hpp"

namespace tdvpl {

/// One symmetric time step: a right-to-left half sweep followed by a
/// left-to-right half sweep, each of length dt/2.
struct SweepPlan {
  double dt = 0.005;
  KrylovOptions krylov{};
  /// Local problems up to this dimension are exponentiated densely.
  Eigen::Index dense_limit = 32;
};

/// Norm drift beyond this raises IntegrationFailure.
inline constexpr double kNormDriftLimit = 1e-6;

/// Zero operator with an empty one-site slot, for field-only evolution.
Mpo zero_hamiltonian(int length);

/// One-site projector-splitting TDVP step with a fixed bond schedule. Each
/// site tensor is rotated forward by its effective Hamiltonian and each
/// bond matrix backward by the zero-site one. Input may have any canonical
/// center; the output is left-canonical (center L-1).
MpsState tdvp_step(MpsState state, const Mpo& hamiltonian, const SweepPlan& plan);

/// tdvp_step under H + sum c(n,a) sigma^a_n with c held constant over the step.
MpsState tdvp_step_timedependent(MpsState state, const Mpo& base, const LocalFieldCoefficients& fields,
                                 const SweepPlan& plan);

}  // namespace tdvpl

#endif  // TDVPL_TDVP_HPP
