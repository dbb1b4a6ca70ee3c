// Copyright 2026 The deepsent Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEEPSENT_ERRORS_HPP_
#define DEEPSENT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace deepsent {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents that do not fit an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Out-of-range hyperparameters, labels or other argument values.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data that breaks a documented invariant (NaN features, absent
// classes, bad manifest rows).
class DataError : public Error {
 public:
  using Error::Error;
};

// A file or path that cannot be opened or read at all.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Binary container problems. Each failure mode has its own subclass so
/// callers can tell a wrong file type from a damaged one.
class FormatError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class DuplicateNameError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Header fields that parse but contradict the format's invariants.
class FormatInvariantError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace deepsent

#endif  // DEEPSENT_ERRORS_HPP_
