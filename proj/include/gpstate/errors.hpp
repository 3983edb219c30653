// Copyright 2026 The gpstate Authors.
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

#ifndef GPSTATE_ERRORS_HPP
#define GPSTATE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gpstate {

// Exception hierarchy. The CLI maps each family to an exit code:
// ValidationError -> 1, NumericalError -> 2, IoError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Raised when a field's norm is too small to renormalize.
class DegenerateFieldError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A stored record failed its checksum.
class ChecksumError : public IoError {
 public:
  ChecksumError(const std::string& what, long long record)
      : IoError(what), record_(record) {}
  long long record() const { return record_; }

 private:
  long long record_;
};

}  // namespace gpstate

#endif  // GPSTATE_ERRORS_HPP
