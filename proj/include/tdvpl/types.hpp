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

#ifndef TDVPL_TYPES_HPP
#define TDVPL_TYPES_HPP

#include <complex>

#include <Eigen/Dense>

namespace tdvpl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2cd;

/// Local Hilbert space dimension (spin one-half).
inline constexpr int kPhysDim = 2;

/// Per-site x, y, z channels of the bath coupling.
inline constexpr int kChannels = 3;

/// Per-site real coefficients, one row per site and one column per channel.
using SiteChannelMatrix = Eigen::Matrix<double, Eigen::Dynamic, kChannels>;

namespace pauli {
Matrix2 identity();
Matrix2 x();
Matrix2 y();
Matrix2 z();
/// Channel 0, 1, 2 -> sigma x, y, z.
Matrix2 channel(int a);
}  // namespace pauli

}  // namespace tdvpl

#endif  // TDVPL_TYPES_HPP
