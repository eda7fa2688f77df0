// include/alsed/error.hpp

// Copyright 2026  The alsed Authors
//
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

#ifndef ALSED_ERROR_HPP_
#define ALSED_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace alsed {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported input data (files, configs, label sets).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Operation is not valid in the current state (open batch, duplicate submit).
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// Referenced entity does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace alsed

#endif  // ALSED_ERROR_HPP_
