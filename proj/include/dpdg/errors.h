// Copyright 2026 The dpdg Authors
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

#ifndef DPDG_ERRORS_H_
#define DPDG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dpdg {

// Invalid argument: index out of range, self-loop query, mismatched sizes.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A distribution or privacy parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A linear system that cannot be solved (zero pivot, non-finite entries).
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The covariate information matrix or a bias denominator is degenerate.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                          what
                                    : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Well-formed input that violates a data invariant (self-loop, empty graph).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Attribute schema inconsistent with the covariate rules.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpdg

#endif  // DPDG_ERRORS_H_
