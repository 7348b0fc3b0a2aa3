#pragma once

#include <stdexcept>
#include <string>

namespace resdelta {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two roots of one polynomial coincide within the coincidence tolerance.
struct RepeatedRoot : Error {
  using Error::Error;
};

struct DegreeMismatch : Error {
  using Error::Error;
};

// A factor list contains two affine functions that are scalar multiples of
// each other (as affine functions, gradient and offset together).
struct ProportionalFactors : Error {
  int i, j;
  ProportionalFactors(int i_, int j_)
      : Error("factors " + std::to_string(i_) + " and " + std::to_string(j_) +
              " are proportional"),
        i(i_), j(j_) {}
};

struct ZeroGradient : Error {
  using Error::Error;
};

// Exact polynomial division left a nonzero remainder.  Reaching this would
// falsify the polynomiality of the multiplier; it must never fire on valid
// inputs.
struct DivisibilityFailure : Error {
  using Error::Error;
};

// A point handed to an on-support evaluation does not lie on the requested
// support hyperplane.
struct OffSupport : Error {
  using Error::Error;
};

// A polynomial family certified as degree 2 failed the extra-node residual
// check; signals a convention bug, not bad data.
struct DegreeCertificateFailure : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace resdelta
