// core/include/sdtk/error.hpp

// Copyright 2026  The sdtk Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace sdtk {

// Base of every error raised by the toolkit. The CLI maps ValidationError
// and its subclasses to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: config, manifest contents, CLI arguments.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents; message carries the location when known.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Well-formed file in an encoding we do not support.
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class InfeasibleAlignmentError : public Error {
 public:
  using Error::Error;
};

class OovError : public Error {
 public:
  explicit OovError(std::string word)
      : Error("out-of-vocabulary word: " + word), word_(std::move(word)) {}
  const std::string &word() const { return word_; }

 private:
  std::string word_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage was requested before the stage producing its inputs ran.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdtk
