// Copyright (c) 2026 The plfuse Authors
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

#ifndef PLFUSE_ERRORS_H_
#define PLFUSE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace plfuse {

// Bad parameter values or malformed command-line input. Maps to exit status 1.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Unreadable, unparsable or inconsistent input data. Maps to exit status 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

class UnknownTokenError : public InputError {
 public:
  explicit UnknownTokenError(const std::string& unit)
      : InputError("unknown token: '" + unit + "'"), unit_(unit) {}
  const std::string& unit() const { return unit_; }

 private:
  std::string unit_;
};

class InvalidIdError : public InputError {
 public:
  explicit InvalidIdError(long long id)
      : InputError("invalid token id: " + std::to_string(id)) {}
};

class LengthMismatchError : public InputError {
 public:
  using InputError::InputError;
};

class VocabMismatchError : public InputError {
 public:
  using InputError::InputError;
};

// A broken internal invariant. Maps to exit status 3.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace plfuse

#endif  // PLFUSE_ERRORS_H_
