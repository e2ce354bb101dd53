// Copyright 2026 The AID Authors
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

namespace aid {

// Base for every contract violation the library reports. CLI maps these to
// exit code 2; anything else escaping a command is an internal error.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public ContractError {
 public:
  using ContractError::ContractError;
};

class BoxOutsideImage : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

class ParseError : public ContractError {
 public:
  ParseError(const std::string& what, int line)
      : ContractError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class SchemaError : public ContractError {
 public:
  using ContractError::ContractError;
};

class ConfigError : public ContractError {
 public:
  using ContractError::ContractError;
};

class MissingTeacher : public ContractError {
 public:
  using ContractError::ContractError;
};

class ArchitectureMismatch : public ContractError {
 public:
  using ContractError::ContractError;
};

class FrozenModelError : public ContractError {
 public:
  using ContractError::ContractError;
};

class CheckpointError : public ContractError {
 public:
  using ContractError::ContractError;
};

class EmptyDataset : public ContractError {
 public:
  using ContractError::ContractError;
};

class EmptyModel : public ContractError {
 public:
  using ContractError::ContractError;
};

class ClassCountMismatch : public ContractError {
 public:
  using ContractError::ContractError;
};

// Non-finite values in a loss; not a caller mistake, so it is not a
// ContractError.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteLoss : public NumericError {
 public:
  NonFiniteLoss(const std::string& what, int epoch, int batch)
      : NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ": " + what),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const { return epoch_; }
  int batch() const { return batch_; }

 private:
  int epoch_;
  int batch_;
};

}  // namespace aid
