// Copyright 2026 The qgrade Authors
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

namespace qgrade {

/// Malformed caller input: bad sizes, indices, ranges.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested size exceeds what a representation can hold.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// The benchmark protocol cannot produce a meaningful result, e.g. a
/// degenerate noiseless reference or no arrival peak in the search window.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A persisted file does not match its schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QasmSyntaxError : public std::runtime_error {
 public:
  QasmSyntaxError(std::size_t line, const std::string& what)
      : std::runtime_error("qasm:" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedGateError : public std::runtime_error {
 public:
  UnsupportedGateError(std::size_t line, const std::string& gate)
      : std::runtime_error("qasm:" + std::to_string(line) + ": unsupported gate '" + gate + "'"),
        line_(line), gate_(gate) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& gate() const noexcept { return gate_; }

 private:
  std::size_t line_;
  std::string gate_;
};

}  // namespace qgrade
