#pragma once

#include <stdexcept>
#include <string>

namespace pathphase {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input outside the physical domain: non-finite amplitudes, T outside [0,1],
/// malformed grids.
class DomainError : public Error {
public:
  using Error::Error;
};

/// The two interfering states are orthogonal, so their relative phase is
/// undefined.
class OrthogonalityError : public DomainError {
public:
  explicit OrthogonalityError(const std::string& what = "orthogonal states, phase undefined")
      : DomainError(what) {}
};

/// A great-circle arc between antipodal points was requested.
class GeodesicError : public DomainError {
public:
  explicit GeodesicError(const std::string& what = "geodesic undefined between antipodal points")
      : DomainError(what) {}
};

/// A fit parameter has no influence on the objective.
class IdentifiabilityError : public DomainError {
public:
  using DomainError::DomainError;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

}  // namespace pathphase
