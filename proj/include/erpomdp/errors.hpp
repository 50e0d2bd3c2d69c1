#pragma once

#include <stdexcept>
#include <string>

namespace erpomdp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (model files, kernels, parameters).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The filter normalizer vanished: the observation has zero probability under the model.
class ImpossibleObservation : public Error {
 public:
  using Error::Error;
};

/// Entropy gradients diverge on the simplex boundary.
class BoundaryBelief : public Error {
 public:
  using Error::Error;
};

/// The linear (joint-entropy) cost requires beta == lambda.
class WeightMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroLikelihood : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the atom guard.
class TooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace erpomdp
