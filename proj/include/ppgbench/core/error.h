// Copyright 2026 The ppgbench Authors
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

namespace ppgbench {

// Bad input: malformed files, out-of-range parameters, shape mismatches.
// Maps to exit code 1 at the command line.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be parsed; the message names the offending field.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Tensor/layer shapes that cannot be composed.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Metric undefined for the given labels (e.g. AUC with a single class).
class UndefinedMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace ppgbench
