// Copyright 2026 The semtype Authors.
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

#ifndef SEMTYPE_ERRORS_H_
#define SEMTYPE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace semtype {

// Raised when caller-supplied data violates a documented precondition.
// The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string &what)
      : std::invalid_argument(what) {}
};

// Raised for failures that are not the caller's fault: I/O, non-finite
// losses, corrupted archives. The CLI maps it to exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string &what)
      : std::runtime_error(what) {}
};

}  // namespace semtype

#endif  // SEMTYPE_ERRORS_H_
