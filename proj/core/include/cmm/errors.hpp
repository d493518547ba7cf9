#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CMM_DEFINE_ERROR(Name)          \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

CMM_DEFINE_ERROR(DimensionError)
CMM_DEFINE_ERROR(DegreeError)
CMM_DEFINE_ERROR(DegenerateVolumeError)
CMM_DEFINE_ERROR(DomainError)
CMM_DEFINE_ERROR(FlowBlowupError)
CMM_DEFINE_ERROR(InterpolationError)
CMM_DEFINE_ERROR(GaugeError)
CMM_DEFINE_ERROR(NotHolomorphicError)
CMM_DEFINE_ERROR(PathTypeError)
CMM_DEFINE_ERROR(StallError)
CMM_DEFINE_ERROR(GaugeNotFixedError)
CMM_DEFINE_ERROR(DivergedError)
CMM_DEFINE_ERROR(ConfigError)
CMM_DEFINE_ERROR(IoError)
CMM_DEFINE_ERROR(UsageError)

#undef CMM_DEFINE_ERROR

// Positivity failures carry the component and grid node where the check was
// worst, so callers can point at the offending location.
class PositivityError : public Error {
 public:
  PositivityError(const std::string& what, int component, std::size_t node, double value)
      : Error(what + " (component " + std::to_string(component) + ", node " +
              std::to_string(node) + ", value " + std::to_string(value) + ")"),
        component_(component), node_(node), value_(value) {}
  int component() const { return component_; }
  std::size_t node() const { return node_; }
  double value() const { return value_; }

 private:
  int component_;
  std::size_t node_;
  double value_;
};

class NotKahlerError : public PositivityError {
 public:
  using PositivityError::PositivityError;
};

class NotInConeError : public PositivityError {
 public:
  using PositivityError::PositivityError;
};

inline constexpr double kVolumeEpsilon = 1e-12;

}  // namespace cmm
