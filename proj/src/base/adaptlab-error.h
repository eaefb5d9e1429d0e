// base/adaptlab-error.h

// Copyright 2026  adaptlab authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ADAPTLAB_BASE_ADAPTLAB_ERROR_H_
#define ADAPTLAB_BASE_ADAPTLAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace adaptlab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or dataset dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value left its admissible range (rho outside [0,1], lr <= 0, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf appeared in a loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Container-format failures.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace adaptlab

#endif  // ADAPTLAB_BASE_ADAPTLAB_ERROR_H_
