#pragma once

#include <stdexcept>
#include <string>

namespace exlab {

/// Invalid parameters or configuration. The CLI maps this to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A runtime guard tripped (cycle-length cap, non-terminating chain).
/// The CLI maps this to exit code 3.
class GuardTripped : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A statistical precondition could not be met (too few cycles, too few
/// exceedances, failed transience check).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace exlab
