#pragma once

#include <stdexcept>
#include <string>

namespace coordfeas {

// Base class for all exceptions thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Car-like steering magnitude at or beyond pi/2 (minus a small guard); the
// kinematics degenerate there.
class SingularSteering : public Error {
 public:
  using Error::Error;
};

// A requested velocity is not reachable by the vehicle's control fields.
class NotInDistribution : public Error {
 public:
  using Error::Error;
};

// Constraint geometry is degenerate at the queried state (e.g. coincident
// positions for a visibility constraint).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

// An operation was invoked on a constraint variant it does not apply to.
class WrongVariant : public Error {
 public:
  using Error::Error;
};

// Closed-form benchmark direction undefined at this state (vanishing
// denominator in the particular solution).
class SingularDirection : public Error {
 public:
  using Error::Error;
};

// Newton correction onto the equality manifold failed to converge.
class ProjectionDiverged : public Error {
 public:
  using Error::Error;
};

// Scenario file is malformed; path() names the offending field.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string path)
      : Error(what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace coordfeas
