#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcsense {

/// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
  invalid_argument,  // precondition / configuration problems (exit 1)
  numeric,           // divergence, failed fits, out-of-range inference (exit 2)
  io,                // unreadable or unwritable files (exit 3)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::invalid_argument, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// A simulated state left the configured saturation bound.
class DivergenceError : public NumericError {
 public:
  DivergenceError(std::size_t cycle, const std::string& what)
      : NumericError(what), cycle_(cycle) {}

  [[nodiscard]] std::size_t cycle() const noexcept { return cycle_; }

 private:
  std::size_t cycle_;
};

/// Fitted amplitudes do not decay (fitted time constant <= 0).
class NoDecayError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Calibration sweep whose time constants are not strictly monotone.
class MonotonicityError : public NumericError {
 public:
  MonotonicityError(std::size_t index, const std::string& what)
      : NumericError(what), index_(index) {}

  /// Index (in concentration order) of the first point breaking monotonicity.
  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Query outside a calibration curve's range. Carries the nearest endpoint.
class OutOfRangeError : public NumericError {
 public:
  OutOfRangeError(double nearest_concentration, double nearest_tau_c,
                  const std::string& what)
      : NumericError(what),
        nearest_concentration_(nearest_concentration),
        nearest_tau_c_(nearest_tau_c) {}

  [[nodiscard]] double nearest_concentration() const noexcept {
    return nearest_concentration_;
  }
  [[nodiscard]] double nearest_tau_c() const noexcept { return nearest_tau_c_; }

 private:
  double nearest_concentration_;
  double nearest_tau_c_;
};

}  // namespace rcsense
