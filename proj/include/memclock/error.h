// Copyright 2026 The memclock Authors. All Rights Reserved.
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

#ifndef MEMCLOCK_ERROR_H_
#define MEMCLOCK_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace memclock {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-conformable operands; the message names both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A precondition on a scalar argument was violated (sigma_w <= 0,
// lambda * eta >= 1, k > K, degenerate abscissae, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A gradient or update became non-finite at a given optimizer step.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::int64_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

// A Frobenius norm crossed the blow-up threshold. `time` is the step index
// for discrete runs and the integration time for flows.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(what + " (at " + std::to_string(time) + ")"), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, const std::string& path)
      : Error(what + ": " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Any Frobenius norm above this aborts a run.
inline constexpr double kBlowUpNorm = 1e12;

}  // namespace memclock

#endif  // MEMCLOCK_ERROR_H_
