#pragma once

#include <cstdint>
#include <string>

#include "affine/numeric.hpp"

namespace affine {

/// Result of a Monte Carlo average. std_error is the sample standard
/// deviation over sqrt(samples); it is zero only when every draw agreed.
struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t nonfinite = 0;

  /// Invalid once more than 0.1% of the draws were non-finite.
  bool valid() const { return samples > 0 && nonfinite * 1000 <= samples; }
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error_bound = 0.0;
  bool converged = true;
};

/// A scalar with an attached uncertainty. Quadrature results carry their
/// error bound in error_bound and zero std_error; MC results the reverse.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  double error_bound = 0.0;
  std::size_t samples = 0;
  bool valid = true;
  std::string method = "exact";

  static Estimate exact(double v) { return Estimate{v, 0.0, 0.0, 0, true, "exact"}; }
  static Estimate from(const MCEstimate& mc) {
    return Estimate{mc.value, mc.std_error, 0.0, mc.samples, mc.valid(), "mc"};
  }
  static Estimate from(const QuadratureResult& q) {
    return Estimate{q.value, 0.0, q.abs_error_bound, 0, q.converged, "quadrature"};
  }

  double relative_std_error() const { return value != 0.0 ? std::abs(std_error / value) : 0.0; }
};

/// Combine the methods of two inputs for provenance strings.
std::string merge_methods(const std::string& a, const std::string& b);

/// First-order propagation through products, quotients and powers assuming
/// independent inputs.
Estimate operator*(const Estimate& a, const Estimate& b);
Estimate operator/(const Estimate& a, const Estimate& b);
Estimate operator*(const Estimate& a, double s);
Estimate pow(const Estimate& a, double exponent);

}  // namespace affine
