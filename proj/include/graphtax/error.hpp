#pragma once

#include <stdexcept>
#include <string>

namespace graphtax {

// Bad caller input: malformed files, out-of-range ids, shape mismatches.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values produced by numeric code (NaN/Inf is an error state).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem or parse failures; messages carry the path (and line if known).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Protocol-level evaluation failures (no evaluable class, too many diverged runs).
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace graphtax
