#pragma once

#include <stdexcept>
#include <string>

namespace ssgm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain of the requested operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure (quadrature, factorization, fit) did not succeed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssgm
