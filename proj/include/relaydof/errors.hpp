/*
 * Copyright 2026 The relaydof Authors
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

#ifndef RELAYDOF_ERRORS_HPP
#define RELAYDOF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace relaydof {

/// Base class for numerical failures that a Monte Carlo trial may recover
/// from by redrawing the channel realization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear solve hit a pivot below the singularity threshold.
class SingularMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A null-space request found no null space (numerical rank == columns).
class EmptyNullSpaceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An effective/decoding matrix lost full rank.
class RankDeficientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The aggregate noise covariance of a stacked observation is singular.
class SingularNoiseCovError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Channel magnitude band is degenerate (h_min >= h_max or h_min <= 0).
class BadBandError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A node appears in both the source and destination set of one slot.
class HalfDuplexError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid experiment configuration (scheme/parameter mismatch etc.).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace relaydof

#endif  // RELAYDOF_ERRORS_HPP
