#pragma once

#include <stdexcept>
#include <string>

namespace infavg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition stated on an operation was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

/// Two trajectories or a trajectory and a lookup time do not share a grid.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Free flight exceeded the configured horizon cap.
class HorizonViolation : public Error {
 public:
  using Error::Error;
};

/// Impact with |<v,n>| below the grazing tolerance; the orbit is discarded.
class GrazingCollision : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DepthOverflow : public Error {
 public:
  using Error::Error;
};

class TruncationTooSmall : public Error {
 public:
  using Error::Error;
};

}  // namespace infavg
