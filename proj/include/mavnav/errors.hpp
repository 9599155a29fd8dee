#pragma once

#include <stdexcept>
#include <string>

namespace mavnav {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A kinematic limit would be violated beyond tolerance.
struct ConstraintError : Error {
  using Error::Error;
};

// Axis durations cannot be reconciled to a common total time.
struct SyncError : Error {
  using Error::Error;
};

// Start or goal pose maps into occupied space.
struct PoseError : Error {
  using Error::Error;
};

// No path exists between free start and goal cells.
struct UnreachableError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

// Referenced row / storage unit / tag ID does not exist.
struct LookupError : Error {
  using Error::Error;
};

// Point sets too degenerate for a rigid fit.
struct DegenerateError : Error {
  using Error::Error;
};

// World extent exceeds the configured cell-count cap.
struct OversizeError : Error {
  using Error::Error;
};

}  // namespace mavnav
