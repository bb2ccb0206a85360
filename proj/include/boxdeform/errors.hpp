// Copyright 2026 The boxdeform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace boxdeform {

// Input collection was empty where at least one element is required.
class EmptyInputError : public std::invalid_argument {
 public:
  explicit EmptyInputError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Geometry violates a structural invariant (bad face index, zero area, ...).
class GeometryError : public std::invalid_argument {
 public:
  explicit GeometryError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Malformed file or serialized payload.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or a failed numerical self-check.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace boxdeform
