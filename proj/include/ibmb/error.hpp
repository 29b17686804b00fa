// Copyright 2026 The IBMB Authors.
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

namespace ibmb {

/** Base class of every error raised by the library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** Malformed text input; carries the 1-based line number. */
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/** A node id, index or probability outside its admissible range. */
class RangeError : public Error {
  using Error::Error;
};

/** An argument that violates an operation precondition. */
class ArgumentError : public Error {
  using Error::Error;
};

/** Bad magic, truncated payload or inconsistent binary content. */
class FormatError : public Error {
  using Error::Error;
};

/** Artifact written by an incompatible format version. */
class VersionError : public FormatError {
  using FormatError::FormatError;
};

/** Matrix dimensions do not line up. */
class ShapeError : public Error {
  using Error::Error;
};

/** Numerical domain violation, e.g. a zero probability inside a log. */
class DomainError : public Error {
  using Error::Error;
};

/** Input too large for a dense oracle. */
class SizeError : public Error {
  using Error::Error;
};

/** A required keyed entry is missing. */
class LookupError : public Error {
  using Error::Error;
};

/** Input that is well-formed but carries no usable signal. */
class DegenerateInputError : public Error {
  using Error::Error;
};

/** A documented precondition of the input object does not hold. */
class PreconditionError : public Error {
  using Error::Error;
};

/** A file could not be opened, read or written. */
class IoError : public Error {
  using Error::Error;
};

}  // namespace ibmb
