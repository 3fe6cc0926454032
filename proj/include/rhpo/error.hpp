/*
 * Copyright 2026 The rhpo Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace rhpo {

// Bad argument or configuration supplied by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data could not be read or does not satisfy a dataset precondition.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested stratification cannot be satisfied (a class is too small).
class StratificationError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace rhpo
