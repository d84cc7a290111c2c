#ifndef TELEFIT_ERROR_HPP
#define TELEFIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace telefit {

/// Invalid parameter values or violated preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chain or a whole fit could not produce a usable sample.
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too many spacing proposals fell below the floor c0.
class DiscardAbort : public SamplerError {
 public:
  using SamplerError::SamplerError;
};

}  // namespace telefit

#endif  // TELEFIT_ERROR_HPP
