#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace atorsion {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (t <= 0, s <= 1, u < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or basis resolution below the exactness bound.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Conformal factor nonpositive (or non-finite) at a quadrature node.
class InvalidMetricError : public Error {
 public:
  using Error::Error;
};

/// Chern density requested on the kink set of a singular metric.
class UnsupportedPointError : public Error {
 public:
  using Error::Error;
};

/// Bott-Chern integrand needs a c1 density the metric cannot provide.
class UnsupportedMetricError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization of the mass matrix failed.
class IndefiniteMassError : public Error {
 public:
  using Error::Error;
};

/// Implicit QL did not converge within the sweep cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::Index stuck_index)
      : Error(what), stuck_index_(stuck_index) {}
  Eigen::Index stuck_index() const noexcept { return stuck_index_; }

 private:
  Eigen::Index stuck_index_;
};

/// Heat-trace fit window outside the region where the discrete trace is valid.
class FitWindowError : public Error {
 public:
  using Error::Error;
};

/// Spectrum unusable for the requested quantity (no positive eigenvalue, ...).
class SpectrumError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, metric specification or command line.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace atorsion
