#pragma once

#include <stdexcept>

namespace redlab {

// An argument violates a documented precondition.
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An exact computation would exceed its enumeration or state-space budget.
class size_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested load admits no stationary distribution.
class unstable_system : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace redlab
