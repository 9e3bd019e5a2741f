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

#ifndef TDVPL_ERRORS_HPP
#define TDVPL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tdvpl {

/// A caller broke a documented precondition (shape, Hermiticity, gauge, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not deliver a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The time integrator left its accuracy envelope (norm drift and similar).
class IntegrationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A persisted file is truncated, corrupt, or from another code version.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run or analysis configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace tdvpl

#endif  // TDVPL_ERRORS_HPP
