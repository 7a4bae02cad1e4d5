/* Copyright 2026 The Tenergy Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef TENERGY_ERRORS_H_
#define TENERGY_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tenergy {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Malformed input: a file, a record, a name, or a configuration field.
// `line()` is 1-based, or 0 when the error is not tied to a line.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : Error(message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that cannot be given a meaning, e.g. a name that would
// have to be both a tensor and a composite layer.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& message) : Error(message) {}
};

// A caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message) : Error(message) {}
};

}  // namespace tenergy

#endif  // TENERGY_ERRORS_H_
