/* Copyright 2026 The NCS Authors. All Rights Reserved.

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

#ifndef NCS_ERRORS_HPP_
#define NCS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ncs {

// Base for every error raised by the engine. The CLI maps the concrete
// subclass to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or configuration value (exit code 2).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed architecture descriptor or file document (exit code 2).
class StructuralError : public DomainError {
 public:
  using DomainError::DomainError;
};

// An evaluator could not produce accuracies (exit code 3).
class EvaluatorError : public Error {
 public:
  EvaluatorError(std::string candidate_id, const std::string& message)
      : Error(candidate_id.empty() ? message
                                   : "candidate " + candidate_id + ": " + message),
        candidate_id_(std::move(candidate_id)) {}

  const std::string& candidate_id() const noexcept { return candidate_id_; }

 private:
  std::string candidate_id_;
};

// The external trainer answered with a document violating the wire contract.
class ProtocolError : public EvaluatorError {
 public:
  using EvaluatorError::EvaluatorError;
};

// Internal consistency check failed (exit code 4).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncs

#endif  // NCS_ERRORS_HPP_
