// Copyright 2026 The tfdiff Authors. All Rights Reserved.
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
#include <utility>
#include <vector>

namespace tfd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument, shape mismatch, malformed file or config.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A schedule breaks the per-step signal-weight condition gamma[t][n] < 1.
class ConvergenceViolation : public Error {
 public:
  ConvergenceViolation(std::string what, std::vector<std::pair<int, int>> indices)
      : Error(std::move(what)), indices_(std::move(indices)) {}

  /// Offending (t, n) pairs, t in [1, T], n in [0, N).
  const std::vector<std::pair<int, int>>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::pair<int, int>> indices_;
};

/// Training produced a non-finite loss or diverged.
class TrainingAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace tfd
