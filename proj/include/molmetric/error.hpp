//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_ERROR_HPP
#define MOLMETRIC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace molmetric {

// Coarse error classes. The CLI maps these onto exit codes.
enum class ErrorClass {
  kInput,      // malformed or missing input data
  kNumerical,  // numerical failure in a well-formed computation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), class_(cls) { }

  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ErrorClass::kInput, what) { }
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorClass::kNumerical, what) { }
};

}  // namespace molmetric

#endif  // MOLMETRIC_ERROR_HPP
