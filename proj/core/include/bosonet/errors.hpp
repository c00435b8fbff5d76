#pragma once

#include <stdexcept>
#include <string>

namespace bosonet {

// SVD non-convergence, non-finite intermediate values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural invariant of a tensor or distribution was violated.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The state lost too much weight to truncation to be sampled or marginalized.
class DegradedStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problem size exceeds the limits of an exact (exponential-cost) routine.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bosonet
