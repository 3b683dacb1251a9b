#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace curveortho {

using cplx = std::complex<double>;
using cld = std::complex<long double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Failure categories shared by every module. The CLI maps them onto exit codes.
enum class ErrorKind {
  Domain,             // argument outside the region where the operation is defined
  IterationFailure,   // Newton or similar did not converge
  FitFailure,         // interior-map collocation residual too large
  Configuration,      // inconsistent user input
  Resolution,         // quadrature/Fourier truncation not resolved
  Coincidence,        // kernel evaluated at its pole
  CutProximity,       // evaluation on or near a branch cut
  ContourProximity,   // target too close to an integration contour
  ContractionViolated,
  Conditioning,
  Precondition,
  Index,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::IterationFailure: return "iteration-failure";
    case ErrorKind::FitFailure: return "fit-failure";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Coincidence: return "coincidence";
    case ErrorKind::CutProximity: return "cut-proximity";
    case ErrorKind::ContourProximity: return "contour-proximity";
    case ErrorKind::ContractionViolated: return "contraction-violated";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Index: return "index";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double value = 0.0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), value_(value) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Diagnostic number attached to the failure (last residual, smallest admissible n, ...).
  double value() const noexcept { return value_; }

 private:
  ErrorKind kind_;
  double value_;
};

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

/// Equispaced angles 2*pi*j/N.
inline double node_angle(int j, int n) { return kTwoPi * static_cast<double>(j) / static_cast<double>(n); }

inline cplx unit(double theta) { return {std::cos(theta), std::sin(theta)}; }

}  // namespace curveortho
