/* Copyright 2026 The qnet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef QNET_ERROR_H_
#define QNET_ERROR_H_

#include <stdexcept>
#include <string>

namespace qnet {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Graph structure is inconsistent: shape mismatch, missing weights, orphan
// weights, unsupported layer kinds.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Caller supplied an invalid argument or configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file parsed but its content is malformed (bad magic, truncated payload).
class FormatError : public Error {
 public:
  using Error::Error;
};

// The operating system refused an I/O request.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qnet

#endif  // QNET_ERROR_H_
