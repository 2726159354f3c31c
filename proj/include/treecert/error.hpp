/*
 * Copyright 2026 The treecert Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace treecert {

enum class ErrorKind {
  kInputShape,    // arity mismatch between a point/box and the model
  kParse,         // malformed JSON, CSV or domain text
  kSchema,        // well-formed document that violates the model schema
  kOverflow,      // non-finite partial sums during enumeration
  kInvalidArgument,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInputShape: return "input-shape error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kSchema: return "schema violation";
    case ErrorKind::kOverflow: return "numeric overflow";
    case ErrorKind::kInvalidArgument: return "invalid argument";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace treecert
