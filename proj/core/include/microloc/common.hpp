// Shared scalar types, constants, and the error hierarchy used across the
// library. Every failure the library can signal carries an ErrorKind so the
// CLI can map it onto its exit-code contract.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace microloc {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cdouble kI{0.0, 1.0};

enum class ErrorKind {
  domain,      // argument outside the mathematical domain of an operation
  usage,       // malformed CLI/config input
  hypothesis,  // parameter set leaves the scope of the limit laws
  io,          // filesystem failure
  resolution,  // grid cannot resolve the requested data or cutoff
  box,         // grid box too small for the requested time
  regime,      // exponent outside the supported regime classification
  numeric,     // non-finite value or failed numerical process
  quadrature,  // quadrature failed to converge
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

// ⟨ρ⟩ = sqrt(1 + ρ²)
inline double japanese_bracket(double rho) {
  return std::sqrt(1.0 + rho * rho);
}

}  // namespace microloc
