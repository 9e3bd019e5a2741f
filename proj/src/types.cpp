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

#include "tdvpl/types.hpp"

#include <stdexcept>

namespace tdvpl::pauli {

Matrix2 identity() { return Matrix2::Identity(); }

Matrix2 x() {
  Matrix2 m;
  m << 0, 1, 1, 0;
  return m;
}

Matrix2 y() {
  Matrix2 m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix2 z() {
  Matrix2 m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix2 channel(int a) {
  switch (a) {
    case 0: return x();
    case 1: return y();
    case 2: return z();
    default: throw std::out_of_range("pauli::channel: channel must be 0, 1 or 2");
  }
}

}  // namespace tdvpl::pauli
