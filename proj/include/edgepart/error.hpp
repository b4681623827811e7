// Copyright 2026 The Edgepart Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace edgepart {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or input file (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A domain/type invariant was violated (bad argument, bad profile, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// No feasible solution exists (CLI exit code 1). Carries the ids of the
/// devices whose constraints block feasibility, when known.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& msg, std::vector<int> devices = {})
      : Error(msg), device_ids(std::move(devices)) {}
  std::vector<int> device_ids;
};

/// Numerical failure inside a solver (line search stalled, non-PD system...).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgepart

#define EDGEPART_REQUIRE(cond, extype, msg)       \
  do {                                            \
    if (!(cond)) throw ::edgepart::extype((msg)); \
  } while (0)
