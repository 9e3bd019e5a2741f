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

#ifndef TDVPL_VERIFY_HPP
#define TDVPL_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace tdvpl {

/// One quick oracle comparison: the measured discrepancy and its bound.
struct CheckResult {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

/// Small-system checks of the MPS code paths against the dense oracle,
/// sized to finish in well under a minute.
std::vector<CheckResult> run_oracle_suite(std::uint64_t seed = 1);

}  // namespace tdvpl

#endif  // TDVPL_VERIFY_HPP
