// Copyright 2026 The hagan3d Authors. All rights reserved.
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

namespace hagan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents that do not fit an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Rejected configuration, detected before any allocation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf or a numerically degenerate input.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed file: bad magic, unknown version, checksum or length mismatch.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Misuse of the autodiff tape (non-scalar loss, detached graph, ...).
class AutodiffError : public Error {
 public:
  using Error::Error;
};

}  // namespace hagan
