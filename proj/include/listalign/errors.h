// Copyright (c) 2026 The listalign Authors. All Rights Reserved.
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace listalign {

enum class ErrorCode {
  kValidation,  // a value violates a schema or range constraint
  kParse,       // malformed input text
  kDimension,   // vector/matrix shape mismatch
  kConflict,    // operation not allowed in the current protocol state
  kNotFound,
  kUndefined,   // statistic not defined for the given input
  kState,       // precondition on a computation not met
  kIo,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message,
                  std::size_t line = 0)
      : Error(ErrorCode::kValidation, message),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  /// 1-based input line when raised while reading a file, else 0.
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

/// Raised by line-oriented readers; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message)
      : Error(ErrorCode::kDimension, message) {}
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& message)
      : Error(ErrorCode::kConflict, message) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message)
      : Error(ErrorCode::kNotFound, message) {}
};

class UndefinedError : public Error {
 public:
  explicit UndefinedError(const std::string& message)
      : Error(ErrorCode::kUndefined, message) {}
};

}  // namespace listalign
