// Copyright 2026 The qi-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qisim {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-side mistakes: parameter out of range, operator/state dimensions
// that do not line up, unknown subsystem labels, broken preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class UnknownFactor : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ContractError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Numerical failures: PSD violations, zero-trace ensembles.
class NumericError : public Error {
 public:
  using Error::Error;
};

class EmptyEnsemble : public NumericError {
 public:
  using NumericError::NumericError;
};

// Problems with measured or ingested data.
class DataError : public Error {
 public:
  using Error::Error;
};

class NoCoincidences : public DataError {
 public:
  using DataError::DataError;
};

class MissingSetting : public DataError {
 public:
  using DataError::DataError;
};

class MissingChannel : public DataError {
 public:
  using DataError::DataError;
};

/// Malformed tag record. `offset` is a byte offset for binary input and a
/// 1-based line number for CSV input.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

/// Unreadable input or unwritable output file.
class IoError : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid run configuration; `field()` is the `section.key` path at fault.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace qisim
